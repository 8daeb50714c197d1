#ifndef CTMLE_SIMULATE_HPP
#define CTMLE_SIMULATE_HPP

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "ctmle/models.hpp"
#include "ctmle/rng.hpp"

namespace ctmle {

enum class Scheme { Exact, Euler, Milstein };
enum class PositivityFix { Reflect, FullTruncation };

struct SimulationConfig {
    DiffusionModel model;
    Eigen::VectorXd theta;
    double s0 = 0.0;
    double delta = 0.0; // observation spacing in years
    int n = 0;          // number of observations (first one is s0)
    int substeps = 10;  // sub-stepping rate for Euler/Milstein
    Scheme scheme = Scheme::Milstein;
    PositivityFix positivity = PositivityFix::Reflect;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0; // per-trial stream index
};

/// Simulate n observations spaced delta apart, starting at s0. Deterministic
/// given (seed, stream). Exact sampling is available for GBM and OU; CIR
/// exact sampling via the noncentral chi-square transition is provided as an
/// extension (requires 4*kappa*mu/sigma^2 > 1).
std::vector<double> simulate_path(const SimulationConfig& cfg);

/// Gamma(alpha, 1) sampler (Marsaglia-Tsang), alpha > 0.
double sample_gamma(CounterRng& rng, double alpha);

/// Noncentral chi-square with dof > 1 and noncentrality lambda >= 0.
double sample_noncentral_chi2(CounterRng& rng, double dof, double lambda);

} // namespace ctmle

#endif
