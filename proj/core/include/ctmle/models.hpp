#ifndef CTMLE_MODELS_HPP
#define CTMLE_MODELS_HPP

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ctmle/params.hpp"

namespace ctmle {

/// A univariate parametric diffusion dS = mu(S,theta) dt + sigma(S,theta) dW.
///
/// Partials are with respect to the parameters: drift_partial(s,theta,u) is
/// d mu / d theta_u and diffusion_sq_partial(s,theta,u) is d sigma^2 / d theta_u.
/// The sigma^2 form is what the generator assembly consumes directly.
/// exact_density, when present, evaluates the transition density
/// p(delta, s_next, s; theta).
struct DiffusionModel {
    using CoeffFn = std::function<double(double s, const Eigen::VectorXd& theta)>;
    using PartialFn = std::function<double(double s, const Eigen::VectorXd& theta, int u)>;
    using DensityFn =
        std::function<double(double delta, double s_next, double s, const Eigen::VectorXd& theta)>;

    std::string name;
    int dim = 0;
    CoeffFn drift;
    CoeffFn diffusion; // sigma(s,theta), must be > 0 on the domain interior
    PartialFn drift_partial;
    PartialFn diffusion_sq_partial;
    DensityFn exact_density; // may be empty
    double domain_lo = -std::numeric_limits<double>::infinity();
    double domain_hi = std::numeric_limits<double>::infinity();

    // Default parameter box used by the harness when the caller does not
    // supply one (true values and randomized starts are drawn from it).
    Eigen::VectorXd default_lower;
    Eigen::VectorXd default_upper;

    bool positive_domain() const { return domain_lo >= 0.0; }
    bool has_exact_density() const { return static_cast<bool>(exact_density); }

    double diffusion_sq(double s, const Eigen::VectorXd& theta) const {
        double sg = diffusion(s, theta);
        return sg * sg;
    }

    ParamVector default_box() const {
        Eigen::VectorXd mid = 0.5 * (default_lower + default_upper);
        return ParamVector(mid, default_lower, default_upper);
    }
};

// Closed-form transition densities.
double gbm_density(double delta, double s_next, double s, const Eigen::VectorXd& theta);
double ou_density(double delta, double s_next, double s, const Eigen::VectorXd& theta);
double cir_density(double delta, double s_next, double s, const Eigen::VectorXd& theta);

/// Exponentially scaled modified Bessel function of the first kind,
/// I_nu(x) * exp(-x), valid for x > 0 and any real order nu > -1 as well as
/// non-negative orders below -1 via the reflection with K_nu.
double scaled_bessel_i(double nu, double x);

// Builtin model families: "gbm", "ou", "cir", "ckls", "hyperbolic".
DiffusionModel make_gbm();
DiffusionModel make_ou();
DiffusionModel make_cir();
DiffusionModel make_ckls();
DiffusionModel make_hyperbolic();
std::vector<DiffusionModel> builtin_models();
DiffusionModel find_model(const std::string& name);

/// Fill in missing parameter partials of a user-supplied model with central
/// finite differences of drift / sigma^2 (reduced accuracy, documented).
DiffusionModel with_fd_partials(DiffusionModel model);

} // namespace ctmle

#endif
