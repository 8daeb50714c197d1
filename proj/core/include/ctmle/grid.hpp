#ifndef CTMLE_GRID_HPP
#define CTMLE_GRID_HPP

#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ctmle/models.hpp"

namespace ctmle {

/// Discrete state space s_0 < s_1 < ... < s_{m-1} of the approximating chain.
/// Indices are 0-based throughout the library.
struct StateSpace {
    Eigen::VectorXd points; // size m, strictly increasing
    Eigen::VectorXd steps;  // size m-1, steps[i] = points[i+1] - points[i]
    int m = 0;

    double max_step() const { return steps.maxCoeff(); }
    bool covers(double lo, double hi) const { return points[0] <= lo && points[m - 1] >= hi; }
};

/// Sample mapped onto the state space by nearest-point binning.
struct BinnedSample {
    std::vector<int> indices; // 0-based state indices, length N
    double delta = 0.0;       // observation spacing in years
    std::pair<double, double> raw_range{0.0, 0.0};
    int clipped = 0; // observations outside the grid, mapped to the nearest endpoint
};

/// Uniform grid covering the sample range padded by pad_fraction of the range
/// on each side, clipped to the model domain (lo, hi). For positive domains
/// the left edge stays at least eps = 1e-4 * max(sample) above zero.
StateSpace build_grid(std::span<const double> sample, int m, double pad_fraction, double domain_lo,
                      double domain_hi);

inline StateSpace build_grid(std::span<const double> sample, int m, double pad_fraction,
                             const DiffusionModel& model) {
    return build_grid(sample, m, pad_fraction, model.domain_lo, model.domain_hi);
}

/// Map each observation to the nearest grid point; exact midpoints break to
/// the lower index.
BinnedSample bin_sample(std::span<const double> sample, const StateSpace& grid, double delta);

} // namespace ctmle

#endif
