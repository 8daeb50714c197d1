#include "ctmle/simulate.hpp"

#include <cmath>
#include <string>

#include "ctmle/errors.hpp"

namespace ctmle {

namespace {

constexpr double kFloorEps = 1e-8;

double spatial_sigma_prime(const DiffusionModel& model, double s, const Eigen::VectorXd& theta) {
    const double h = 1e-5 * (1.0 + std::abs(s));
    return (model.diffusion(s + h, theta) - model.diffusion(s - h, theta)) / (2.0 * h);
}

void check_state(double s, int step) {
    if (!std::isfinite(s))
        throw NumericalError("simulate_path: state became non-finite at step " +
                             std::to_string(step));
}

} // namespace

double sample_gamma(CounterRng& rng, double alpha) {
    if (alpha <= 0.0) throw ConfigError("sample_gamma: alpha must be > 0");
    if (alpha < 1.0) {
        // Boost: Gamma(a) = Gamma(a+1) * U^{1/a}.
        const double u = rng.uniform();
        return sample_gamma(rng, alpha + 1.0) * std::pow(u, 1.0 / alpha);
    }
    const double d = alpha - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = rng.normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = rng.uniform();
        if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
    }
}

double sample_noncentral_chi2(CounterRng& rng, double dof, double lambda) {
    if (dof <= 1.0)
        throw NumericalError("sample_noncentral_chi2: requires dof > 1");
    if (lambda < 0.0) throw ConfigError("sample_noncentral_chi2: lambda must be >= 0");
    const double z = rng.normal() + std::sqrt(lambda);
    double rest = 0.0;
    if (dof > 1.0) rest = 2.0 * sample_gamma(rng, 0.5 * (dof - 1.0));
    return z * z + rest;
}

std::vector<double> simulate_path(const SimulationConfig& cfg) {
    if (cfg.n < 1) throw ConfigError("simulate_path: n must be >= 1");
    if (cfg.delta <= 0.0) throw ConfigError("simulate_path: delta must be > 0");
    if (cfg.substeps < 1) throw ConfigError("simulate_path: substeps must be >= 1");
    if (cfg.s0 <= cfg.model.domain_lo || cfg.s0 >= cfg.model.domain_hi)
        throw ConfigError("simulate_path: s0 outside the model domain");

    CounterRng rng(cfg.seed, cfg.stream);
    std::vector<double> path(cfg.n);
    path[0] = cfg.s0;

    const Eigen::VectorXd& th = cfg.theta;
    const bool positive = cfg.model.positive_domain();

    if (cfg.scheme == Scheme::Exact) {
        if (cfg.model.name == "gbm") {
            const double mu = th[0], sigma = th[1];
            const double drift = (mu - 0.5 * sigma * sigma) * cfg.delta;
            const double vol = sigma * std::sqrt(cfg.delta);
            for (int i = 1; i < cfg.n; ++i) {
                path[i] = path[i - 1] * std::exp(drift + vol * rng.normal());
                check_state(path[i], i);
            }
            return path;
        }
        if (cfg.model.name == "ou") {
            const double kappa = th[0], mu = th[1], sigma = th[2];
            const double e = std::exp(-kappa * cfg.delta);
            const double sd = sigma * std::sqrt((1.0 - e * e) / (2.0 * kappa));
            for (int i = 1; i < cfg.n; ++i) {
                path[i] = mu + (path[i - 1] - mu) * e + sd * rng.normal();
                check_state(path[i], i);
            }
            return path;
        }
        if (cfg.model.name == "cir") {
            // Extension: noncentral chi-square transition sampling.
            const double kappa = th[0], mu = th[1], sigma = th[2];
            const double e = std::exp(-kappa * cfg.delta);
            const double c = sigma * sigma * (1.0 - e) / (4.0 * kappa);
            const double dof = 4.0 * kappa * mu / (sigma * sigma);
            for (int i = 1; i < cfg.n; ++i) {
                const double lambda = path[i - 1] * e / c;
                path[i] = c * sample_noncentral_chi2(rng, dof, lambda);
                check_state(path[i], i);
            }
            return path;
        }
        throw ConfigError("simulate_path: exact scheme is available for gbm, ou, cir only");
    }

    const double h = cfg.delta / cfg.substeps;
    const double sqrt_h = std::sqrt(h);
    for (int i = 1; i < cfg.n; ++i) {
        double s = path[i - 1];
        for (int k = 0; k < cfg.substeps; ++k) {
            const double z = rng.normal();
            const double dw = sqrt_h * z;
            const double sig = cfg.model.diffusion(s, th);
            double s_next = s + cfg.model.drift(s, th) * h + sig * dw;
            if (cfg.scheme == Scheme::Milstein) {
                const double sp = spatial_sigma_prime(cfg.model, s, th);
                s_next += 0.5 * sig * sp * (dw * dw - h);
            }
            if (positive && s_next < kFloorEps) {
                s_next = cfg.positivity == PositivityFix::Reflect
                             ? kFloorEps + std::abs(s_next - kFloorEps)
                             : kFloorEps;
            }
            s = s_next;
            check_state(s, i);
        }
        path[i] = s;
    }
    return path;
}

} // namespace ctmle
