#include "kslab/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace kslab {

std::string to_string(Grading g)
{
    switch (g) {
    case Grading::uniform_in_r: return "uniform_in_r";
    case Grading::uniform_in_s: return "uniform_in_s";
    case Grading::log: return "log";
    }
    return "unknown";
}

Grading grading_from_string(const std::string& name)
{
    if (name == "uniform_in_r") return Grading::uniform_in_r;
    if (name == "uniform_in_s") return Grading::uniform_in_s;
    if (name == "log") return Grading::log;
    throw std::invalid_argument("unknown grading '" + name + "'");
}

Mesh::Mesh(int dimension, Grading grading, std::vector<double> nodes)
    : n_(dimension), grading_(grading), s_(std::move(nodes))
{
    if (n_ < 3) throw std::invalid_argument("mesh dimension must be >= 3");
    if (s_.size() < 3) throw std::invalid_argument("mesh needs at least 2 intervals");
    if (s_.front() != 0.0) throw std::invalid_argument("mesh must start at s = 0");
    for (std::size_t j = 1; j < s_.size(); ++j) {
        if (!(s_[j] > s_[j - 1]) || !std::isfinite(s_[j]))
            throw std::invalid_argument("mesh nodes must be finite and strictly increasing");
    }
    r_.resize(s_.size());
    const double inv_n = 1.0 / n_;
    std::transform(s_.begin(), s_.end(), r_.begin(), [inv_n](double s) { return std::pow(s, inv_n); });
}

std::size_t Mesh::lower_index(double s_value) const
{
    return static_cast<std::size_t>(std::lower_bound(s_.begin(), s_.end(), s_value) - s_.begin());
}

MeshPtr build_mesh(int n, double s_max, std::size_t intervals, Grading grading)
{
    if (n < 3) throw std::invalid_argument("build_mesh: dimension n must be >= 3");
    if (!(s_max > 0.0) || !std::isfinite(s_max)) throw std::invalid_argument("build_mesh: S_max must be positive");
    if (intervals < 2) throw std::invalid_argument("build_mesh: need N >= 2 intervals");

    const std::size_t N = intervals;
    std::vector<double> s(N + 1);
    const double r_max = std::pow(s_max, 1.0 / n);
    switch (grading) {
    case Grading::uniform_in_r: {
        const double dr = r_max / static_cast<double>(N);
        for (std::size_t j = 0; j <= N; ++j) s[j] = std::pow(static_cast<double>(j) * dr, n);
        break;
    }
    case Grading::uniform_in_s:
        for (std::size_t j = 0; j <= N; ++j) s[j] = s_max * static_cast<double>(j) / static_cast<double>(N);
        break;
    case Grading::log: {
        const double log_ratio = -std::log(log_rmin_fraction);
        s[0] = 0.0;
        for (std::size_t j = 1; j <= N; ++j) {
            const double frac = static_cast<double>(j - 1) / static_cast<double>(N - 1);
            s[j] = std::pow(r_max * std::exp(-log_ratio * (1.0 - frac)), n);
        }
        break;
    }
    }
    s[0] = 0.0;
    s[N] = s_max;
    return std::make_shared<const Mesh>(n, grading, std::move(s));
}

}  // namespace kslab
