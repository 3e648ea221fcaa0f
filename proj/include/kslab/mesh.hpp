#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace kslab {

/// Node placement on the volume coordinate s = r^n.
enum class Grading {
    uniform_in_r,  ///< s_j = (j dr)^n, clusters nodes at the origin
    uniform_in_s,  ///< s_j = j S_max / N
    log            ///< r geometric from r_max * log_rmin_fraction, plus the origin node
};

std::string to_string(Grading g);
Grading grading_from_string(const std::string& name);

/// Immutable mesh on [0, S_max] in the volume coordinate s = r^n.
///
/// Holds N intervals (N + 1 nodes) with nodes[0] = 0 and nodes[N] = S_max
/// exactly. The radial grid r_j = s_j^{1/n} is cached alongside.
class Mesh {
public:
    Mesh(int dimension, Grading grading, std::vector<double> nodes);

    int dimension() const { return n_; }
    Grading grading() const { return grading_; }
    std::size_t intervals() const { return s_.size() - 1; }
    std::size_t size() const { return s_.size(); }
    double s_max() const { return s_.back(); }
    double r_max() const { return r_.back(); }

    std::span<const double> s() const { return s_; }
    std::span<const double> r() const { return r_; }
    double s(std::size_t j) const { return s_[j]; }
    double r(std::size_t j) const { return r_[j]; }

    /// Index of the first node with s_j >= value (size() if none).
    std::size_t lower_index(double s_value) const;

private:
    int n_;
    Grading grading_;
    std::vector<double> s_;
    std::vector<double> r_;
};

using MeshPtr = std::shared_ptr<const Mesh>;

/// Smallest radius of the log grading, relative to r_max.
inline constexpr double log_rmin_fraction = 1e-4;

/// Builds a mesh with N intervals on [0, S_max].
/// Throws std::invalid_argument for n < 3, N < 2 or S_max <= 0.
MeshPtr build_mesh(int n, double s_max, std::size_t intervals, Grading grading = Grading::uniform_in_r);

}  // namespace kslab
