#ifndef CTMLE_OPTIMIZER_HPP
#define CTMLE_OPTIMIZER_HPP

#include <functional>

#include <Eigen/Dense>

#include "ctmle/params.hpp"

namespace ctmle {

struct OptimOptions {
    int max_iterations = 200;
    double grad_tol_rel = 1e-6; // converged when ||g||_inf <= grad_tol_rel*(1+|f|)+grad_tol_abs
    double grad_tol_abs = 0.0;
    double step_tol = 1e-10;
    int max_backtracks = 30;
    double fd_rel_step = 1e-6; // finite-difference step when no gradient is given
};

struct OptimResult {
    Eigen::VectorXd x;
    double f = 0.0;
    int iterations = 0;
    bool converged = false;
    double grad_norm = 0.0; // projected gradient inf-norm at the final iterate
    bool line_search_failed = false;
};

using ObjectiveFn = std::function<double(const Eigen::VectorXd&)>;
using GradientFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
using HessianFn = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;

/// Central finite-difference gradient, one-sided at the box edges.
Eigen::VectorXd fd_gradient(const ObjectiveFn& f, const Eigen::VectorXd& x,
                            const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                            double rel_step = 1e-6);

/// Damped quasi-Newton ascent on a box. `hess` may be empty, in which case a
/// BFGS approximation is maintained; `grad` may be empty, in which case
/// central finite differences of `f` are used. Steps are projected onto the
/// box; an indefinite or singular Hessian gets a growing Levenberg shift and
/// a persistent line-search failure returns converged = false.
OptimResult maximize_box(const ObjectiveFn& f, const GradientFn& grad, const HessianFn& hess,
                         const ParamVector& start, const OptimOptions& options = {});

} // namespace ctmle

#endif
