#include "ctmle/models.hpp"

#include <cmath>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_sf_bessel.h>

#include "ctmle/errors.hpp"

namespace ctmle {

namespace {

constexpr double kPi = 3.14159265358979323846;

double gaussian_pdf(double x, double mean, double var) {
    return std::exp(-0.5 * (x - mean) * (x - mean) / var) / std::sqrt(2.0 * kPi * var);
}

struct GslHandlerOff {
    GslHandlerOff() { gsl_set_error_handler_off(); }
};
const GslHandlerOff gsl_handler_off;

Eigen::VectorXd vec(std::initializer_list<double> v) {
    Eigen::VectorXd out(static_cast<int>(v.size()));
    int i = 0;
    for (double x : v) out[i++] = x;
    return out;
}

} // namespace

double gbm_density(double delta, double s_next, double s, const Eigen::VectorXd& theta) {
    if (delta <= 0.0 || s <= 0.0 || s_next <= 0.0)
        throw std::domain_error("gbm_density: requires delta > 0 and positive states");
    const double mu = theta[0], sigma = theta[1];
    if (sigma <= 0.0) throw std::domain_error("gbm_density: sigma must be positive");
    const double sd = sigma * std::sqrt(delta);
    const double mean = std::log(s) + (mu - 0.5 * sigma * sigma) * delta;
    return gaussian_pdf(std::log(s_next), mean, sd * sd) / s_next;
}

double ou_density(double delta, double s_next, double s, const Eigen::VectorXd& theta) {
    if (delta <= 0.0) throw std::domain_error("ou_density: requires delta > 0");
    const double kappa = theta[0], mu = theta[1], sigma = theta[2];
    if (sigma <= 0.0) throw std::domain_error("ou_density: sigma must be positive");
    double mean, var;
    if (kappa == 0.0) {
        // Zero mean-reversion limit: plain Brownian motion.
        mean = s;
        var = sigma * sigma * delta;
    } else {
        const double e = std::exp(-kappa * delta);
        mean = mu + (s - mu) * e;
        var = sigma * sigma / (2.0 * kappa) * (1.0 - e * e);
    }
    return gaussian_pdf(s_next, mean, var);
}

double scaled_bessel_i(double nu, double x) {
    if (x <= 0.0) throw std::domain_error("scaled_bessel_i: requires x > 0");
    gsl_sf_result res;
    if (nu >= 0.0) {
        int status = gsl_sf_bessel_Inu_scaled_e(nu, x, &res);
        if (status != GSL_SUCCESS)
            throw NumericalError("scaled_bessel_i: evaluation failed for nu=" + std::to_string(nu) +
                                 ", x=" + std::to_string(x));
        return res.val;
    }
    // I_{-v}(x) = I_v(x) + (2/pi) sin(v pi) K_v(x), with v = -nu > 0.
    const double v = -nu;
    gsl_sf_result kres;
    int si = gsl_sf_bessel_Inu_scaled_e(v, x, &res);       // e^{-x} I_v(x)
    int sk = gsl_sf_bessel_Knu_scaled_e(v, x, &kres);      // e^{+x} K_v(x)
    if (si != GSL_SUCCESS || sk != GSL_SUCCESS)
        throw NumericalError("scaled_bessel_i: evaluation failed for nu=" + std::to_string(nu) +
                             ", x=" + std::to_string(x));
    return res.val + (2.0 / kPi) * std::sin(v * kPi) * kres.val * std::exp(-2.0 * x);
}

double cir_density(double delta, double s_next, double s, const Eigen::VectorXd& theta) {
    if (delta <= 0.0 || s <= 0.0 || s_next <= 0.0)
        throw std::domain_error("cir_density: requires delta > 0 and positive states");
    const double kappa = theta[0], mu = theta[1], sigma = theta[2];
    if (kappa <= 0.0 || mu <= 0.0 || sigma <= 0.0)
        throw std::domain_error("cir_density: parameters must be positive");
    // Noncentral chi-square form: with cbar = 2k/(sigma^2 (1-e^{-k d})),
    // u = cbar s e^{-k d}, v = cbar s', q = 2 k mu / sigma^2 - 1:
    //   p = cbar e^{-u-v} (v/u)^{q/2} I_q(2 sqrt(uv))
    // evaluated in log form with the exponentially scaled Bessel function.
    const double em = std::exp(-kappa * delta);
    const double cbar = 2.0 * kappa / (sigma * sigma * (1.0 - em));
    const double u = cbar * s * em;
    const double v = cbar * s_next;
    const double q = 2.0 * kappa * mu / (sigma * sigma) - 1.0;
    const double arg = 2.0 * std::sqrt(u * v);
    const double su = std::sqrt(u), sv = std::sqrt(v);
    const double log_p = std::log(cbar) - (su - sv) * (su - sv) + 0.5 * q * (std::log(v) - std::log(u)) +
                         std::log(scaled_bessel_i(q, arg));
    return std::exp(log_p);
}

DiffusionModel make_gbm() {
    DiffusionModel m;
    m.name = "gbm";
    m.dim = 2; // theta = (mu, sigma)
    m.drift = [](double s, const Eigen::VectorXd& th) { return th[0] * s; };
    m.diffusion = [](double s, const Eigen::VectorXd& th) { return th[1] * s; };
    m.drift_partial = [](double s, const Eigen::VectorXd&, int u) { return u == 0 ? s : 0.0; };
    m.diffusion_sq_partial = [](double s, const Eigen::VectorXd& th, int u) {
        return u == 1 ? 2.0 * th[1] * s * s : 0.0;
    };
    m.exact_density = &gbm_density;
    m.domain_lo = 0.0;
    m.default_lower = vec({-0.5, 0.05});
    m.default_upper = vec({0.5, 0.5});
    return m;
}

DiffusionModel make_ou() {
    DiffusionModel m;
    m.name = "ou";
    m.dim = 3; // theta = (kappa, mu, sigma)
    m.drift = [](double s, const Eigen::VectorXd& th) { return th[0] * (th[1] - s); };
    m.diffusion = [](double, const Eigen::VectorXd& th) { return th[2]; };
    m.drift_partial = [](double s, const Eigen::VectorXd& th, int u) {
        if (u == 0) return th[1] - s;
        if (u == 1) return th[0];
        return 0.0;
    };
    m.diffusion_sq_partial = [](double, const Eigen::VectorXd& th, int u) {
        return u == 2 ? 2.0 * th[2] : 0.0;
    };
    m.exact_density = &ou_density;
    m.default_lower = vec({0.5, -1.0, 0.05});
    m.default_upper = vec({10.0, 1.0, 1.0});
    return m;
}

DiffusionModel make_cir() {
    DiffusionModel m;
    m.name = "cir";
    m.dim = 3; // theta = (kappa, mu, sigma)
    m.drift = [](double s, const Eigen::VectorXd& th) { return th[0] * (th[1] - s); };
    m.diffusion = [](double s, const Eigen::VectorXd& th) { return th[2] * std::sqrt(s); };
    m.drift_partial = [](double s, const Eigen::VectorXd& th, int u) {
        if (u == 0) return th[1] - s;
        if (u == 1) return th[0];
        return 0.0;
    };
    m.diffusion_sq_partial = [](double s, const Eigen::VectorXd& th, int u) {
        return u == 2 ? 2.0 * th[2] * s : 0.0;
    };
    m.exact_density = &cir_density;
    m.domain_lo = 0.0;
    m.default_lower = vec({0.2, 0.05, 0.02});
    m.default_upper = vec({8.0, 0.5, 0.5});
    return m;
}

DiffusionModel make_ckls() {
    DiffusionModel m;
    m.name = "ckls";
    m.dim = 4; // drift theta1 + theta2 s, diffusion theta3 s^theta4
    m.drift = [](double s, const Eigen::VectorXd& th) { return th[0] + th[1] * s; };
    m.diffusion = [](double s, const Eigen::VectorXd& th) { return th[2] * std::pow(s, th[3]); };
    m.drift_partial = [](double s, const Eigen::VectorXd&, int u) {
        if (u == 0) return 1.0;
        if (u == 1) return s;
        return 0.0;
    };
    m.diffusion_sq_partial = [](double s, const Eigen::VectorXd& th, int u) {
        const double p = std::pow(s, 2.0 * th[3]);
        if (u == 2) return 2.0 * th[2] * p;
        if (u == 3) return 2.0 * th[2] * th[2] * p * std::log(s);
        return 0.0;
    };
    m.domain_lo = 0.0;
    m.default_lower = vec({0.0, -2.0, 0.01, 0.1});
    m.default_upper = vec({1.0, 2.0, 2.0, 1.5});
    return m;
}

DiffusionModel make_hyperbolic() {
    DiffusionModel m;
    m.name = "hyperbolic";
    m.dim = 2; // theta = (kappa, sigma)
    m.drift = [](double s, const Eigen::VectorXd& th) {
        return -th[0] * s / std::sqrt(1.0 + s * s);
    };
    m.diffusion = [](double, const Eigen::VectorXd& th) { return th[1]; };
    m.drift_partial = [](double s, const Eigen::VectorXd&, int u) {
        return u == 0 ? -s / std::sqrt(1.0 + s * s) : 0.0;
    };
    m.diffusion_sq_partial = [](double, const Eigen::VectorXd& th, int u) {
        return u == 1 ? 2.0 * th[1] : 0.0;
    };
    m.default_lower = vec({0.5, 0.05});
    m.default_upper = vec({10.0, 1.0});
    return m;
}

std::vector<DiffusionModel> builtin_models() {
    return {make_gbm(), make_ou(), make_cir(), make_ckls(), make_hyperbolic()};
}

DiffusionModel find_model(const std::string& name) {
    for (auto& m : builtin_models())
        if (m.name == name) return m;
    throw ConfigError("unknown model '" + name + "' (expected gbm, ou, cir, ckls, hyperbolic)");
}

DiffusionModel with_fd_partials(DiffusionModel model) {
    if (!model.drift_partial) {
        auto drift = model.drift;
        model.drift_partial = [drift](double s, const Eigen::VectorXd& th, int u) {
            const double h = 1e-6 * (1.0 + std::abs(th[u]));
            Eigen::VectorXd tp = th, tm = th;
            tp[u] += h;
            tm[u] -= h;
            return (drift(s, tp) - drift(s, tm)) / (2.0 * h);
        };
    }
    if (!model.diffusion_sq_partial) {
        auto diffusion = model.diffusion;
        model.diffusion_sq_partial = [diffusion](double s, const Eigen::VectorXd& th, int u) {
            const double h = 1e-6 * (1.0 + std::abs(th[u]));
            Eigen::VectorXd tp = th, tm = th;
            tp[u] += h;
            tm[u] -= h;
            const double fp = diffusion(s, tp), fm = diffusion(s, tm);
            return (fp * fp - fm * fm) / (2.0 * h);
        };
    }
    return model;
}

} // namespace ctmle
