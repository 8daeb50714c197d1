#ifndef CTMLE_ESTIMATORS_HPP
#define CTMLE_ESTIMATORS_HPP

#include <span>
#include <string>

#include "ctmle/generator.hpp"
#include "ctmle/likelihood.hpp"
#include "ctmle/models.hpp"
#include "ctmle/optimizer.hpp"
#include "ctmle/params.hpp"

namespace ctmle {

struct EstimatorOptions {
    int m = 300;                // CTMC state count
    double pad_fraction = 0.10; // grid padding on each side of the sample range
    Boundary boundary = Boundary::Reflect;
    bool strict_grid = false; // turn grid-condition violations into errors
    OptimOptions optim;
};

struct EstimationResult {
    ParamVector theta_hat;
    double loglik = 0.0;
    int iterations = 0;
    bool converged = false;
    std::string method;
    double grad_norm = 0.0;
    long clamp_violations = 0; // CTMC only
    long variance_floors = 0;  // Kessler only
    double wall_time_sec = 0.0;
};

/// Maximum likelihood over the CTMC approximation: builds the grid and count
/// matrix once, then iterates the damped quasi-Newton update with the
/// analytic gradient and Fisher-style approximate Hessian.
EstimationResult ctmc_mle(std::span<const double> sample, const DiffusionModel& model,
                          double delta, const ParamVector& theta0,
                          const EstimatorOptions& options = {});

/// Exact MLE from the closed-form transition density (GBM/OU/CIR).
EstimationResult exact_mle(std::span<const double> sample, const DiffusionModel& model,
                           double delta, const ParamVector& theta0,
                           const EstimatorOptions& options = {});

/// Euler pseudo-likelihood: Gaussian with mean s + mu*delta, var sigma^2*delta.
EstimationResult euler_mle(std::span<const double> sample, const DiffusionModel& model,
                           double delta, const ParamVector& theta0,
                           const EstimatorOptions& options = {});

/// Kessler pseudo-likelihood: second-order expansions of the conditional mean
/// and variance (spatial derivatives by central differences).
EstimationResult kessler_mle(std::span<const double> sample, const DiffusionModel& model,
                             double delta, const ParamVector& theta0,
                             const EstimatorOptions& options = {});

/// Shoji-Ozaki local linearization, applied after a variance-stabilizing
/// transform when sigma depends on the state.
EstimationResult shoji_ozaki_mle(std::span<const double> sample, const DiffusionModel& model,
                                 double delta, const ParamVector& theta0,
                                 const EstimatorOptions& options = {});

/// Dispatch by method name: "ctmc", "exact", "euler", "kessler", "shoji-ozaki".
EstimationResult estimate(const std::string& method, std::span<const double> sample,
                          const DiffusionModel& model, double delta, const ParamVector& theta0,
                          const EstimatorOptions& options = {});

} // namespace ctmle

#endif
