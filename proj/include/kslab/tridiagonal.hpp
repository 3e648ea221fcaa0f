#pragma once

#include <vector>

namespace kslab {

/// Solves a tridiagonal system in place by the Thomas algorithm.
/// lower[0] and upper[m-1] are ignored. Returns false on a zero or
/// non-finite pivot; rhs then holds garbage.
bool solve_tridiagonal(const std::vector<double>& lower, std::vector<double> diag, const std::vector<double>& upper,
                       std::vector<double>& rhs);

}  // namespace kslab
