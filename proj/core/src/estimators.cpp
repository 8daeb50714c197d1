#include "ctmle/estimators.hpp"

#include <chrono>
#include <cmath>
#include <memory>

#include "ctmle/errors.hpp"
#include "ctmle/grid.hpp"

namespace ctmle {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kVarFloor = 1e-12;

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

double gaussian_loglik(double x, double mean, double var) {
    return -0.5 * (std::log(kTwoPi * var) + (x - mean) * (x - mean) / var);
}

// Spatial derivatives by central finite differences.
double d_ds(const DiffusionModel::CoeffFn& f, double s, const Eigen::VectorXd& th) {
    const double h = 1e-5 * (1.0 + std::abs(s));
    return (f(s + h, th) - f(s - h, th)) / (2.0 * h);
}

double d2_ds2(const DiffusionModel::CoeffFn& f, double s, const Eigen::VectorXd& th) {
    const double h = 1e-4 * (1.0 + std::abs(s));
    return (f(s + h, th) - 2.0 * f(s, th) + f(s - h, th)) / (h * h);
}

// Integral of 1/sigma over [a, b] by 5-node Gauss-Legendre.
double lamperti_increment(const DiffusionModel& model, double a, double b,
                          const Eigen::VectorXd& th) {
    static const double nodes[5] = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                    0.5384693101056831, 0.9061798459386640};
    static const double weights[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                      0.4786286704993665, 0.2369268850561891};
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double acc = 0.0;
    for (int i = 0; i < 5; ++i) acc += weights[i] / model.diffusion(mid + half * nodes[i], th);
    return half * acc;
}

EstimationResult run_generic(const std::string& method, const ObjectiveFn& objective,
                             const ParamVector& theta0, const EstimatorOptions& options) {
    Stopwatch timer;
    const OptimResult opt = maximize_box(objective, {}, {}, theta0, options.optim);
    EstimationResult res;
    res.theta_hat = theta0.projected(opt.x);
    res.loglik = opt.f;
    res.iterations = opt.iterations;
    res.converged = opt.converged;
    res.method = method;
    res.grad_norm = opt.grad_norm;
    res.wall_time_sec = timer.seconds();
    return res;
}

} // namespace

EstimationResult ctmc_mle(std::span<const double> sample, const DiffusionModel& model,
                          double delta, const ParamVector& theta0,
                          const EstimatorOptions& options) {
    if (sample.size() < 2) throw DataError("ctmc_mle: sample must have >= 2 observations");
    Stopwatch timer;

    const StateSpace grid = build_grid(sample, options.m, options.pad_fraction, model);
    const BinnedSample binned = bin_sample(sample, grid, delta);
    TransitionCounts counts = count_matrix(binned, grid.m);

    auto ws = std::make_shared<LikelihoodWorkspace>(model, grid, std::move(counts), delta,
                                                    options.boundary, options.strict_grid);
    ObjectiveFn obj = [ws](const Eigen::VectorXd& th) { return ws->log_likelihood(th); };
    GradientFn grad = [ws](const Eigen::VectorXd& th) { return ws->gradient(th); };
    HessianFn hess = [ws](const Eigen::VectorXd& th) { return ws->approx_hessian(th); };

    const OptimResult opt = maximize_box(obj, grad, hess, theta0, options.optim);

    EstimationResult res;
    res.theta_hat = theta0.projected(opt.x);
    res.loglik = opt.f;
    res.iterations = opt.iterations;
    res.converged = opt.converged;
    res.method = "ctmc";
    res.grad_norm = opt.grad_norm;
    res.clamp_violations = ws->clamp_violations();
    res.wall_time_sec = timer.seconds();
    return res;
}

EstimationResult exact_mle(std::span<const double> sample, const DiffusionModel& model,
                           double delta, const ParamVector& theta0,
                           const EstimatorOptions& options) {
    if (!model.has_exact_density())
        throw ConfigError("exact_mle: model '" + model.name + "' has no exact transition density");
    std::vector<double> obs(sample.begin(), sample.end());
    auto density = model.exact_density;
    ObjectiveFn obj = [obs = std::move(obs), density, delta](const Eigen::VectorXd& th) {
        double ll = 0.0;
        for (std::size_t n = 0; n + 1 < obs.size(); ++n)
            ll += std::log(density(delta, obs[n + 1], obs[n], th));
        return ll;
    };
    return run_generic("exact", obj, theta0, options);
}

EstimationResult euler_mle(std::span<const double> sample, const DiffusionModel& model,
                           double delta, const ParamVector& theta0,
                           const EstimatorOptions& options) {
    std::vector<double> obs(sample.begin(), sample.end());
    ObjectiveFn obj = [obs = std::move(obs), &model, delta](const Eigen::VectorXd& th) {
        double ll = 0.0;
        for (std::size_t n = 0; n + 1 < obs.size(); ++n) {
            const double s = obs[n];
            const double mean = s + model.drift(s, th) * delta;
            const double var = std::max(model.diffusion_sq(s, th) * delta, kVarFloor);
            ll += gaussian_loglik(obs[n + 1], mean, var);
        }
        return ll;
    };
    return run_generic("euler", obj, theta0, options);
}

EstimationResult kessler_mle(std::span<const double> sample, const DiffusionModel& model,
                             double delta, const ParamVector& theta0,
                             const EstimatorOptions& options) {
    std::vector<double> obs(sample.begin(), sample.end());
    auto floors = std::make_shared<long>(0);
    auto sig2 = [&model](double s, const Eigen::VectorXd& th) { return model.diffusion_sq(s, th); };
    ObjectiveFn obj = [obs = std::move(obs), &model, sig2, delta, floors](const Eigen::VectorXd& th) {
        double ll = 0.0;
        const double d2 = 0.5 * delta * delta;
        for (std::size_t n = 0; n + 1 < obs.size(); ++n) {
            const double s = obs[n];
            const double mu = model.drift(s, th);
            const double mu1 = d_ds(model.drift, s, th);
            const double mu2 = d2_ds2(model.drift, s, th);
            const double t = sig2(s, th);
            const double t1 = d_ds(sig2, s, th);
            const double t2 = d2_ds2(sig2, s, th);

            // Second-order expansions of E[S'] and E[S'^2] via the generator.
            const double mean = s + delta * mu + d2 * (mu * mu1 + 0.5 * t * mu2);
            const double second = s * s + delta * (2.0 * mu * s + t) +
                                  d2 * (mu * (2.0 * mu + 2.0 * mu1 * s + t1) +
                                        0.5 * t * (4.0 * mu1 + 2.0 * mu2 * s + t2));
            double var = second - mean * mean;
            if (var <= kVarFloor) {
                var = kVarFloor;
                ++*floors;
            }
            ll += gaussian_loglik(obs[n + 1], mean, var);
        }
        return ll;
    };
    EstimationResult res = run_generic("kessler", obj, theta0, options);
    res.variance_floors = *floors;
    return res;
}

EstimationResult shoji_ozaki_mle(std::span<const double> sample, const DiffusionModel& model,
                                 double delta, const ParamVector& theta0,
                                 const EstimatorOptions& options) {
    std::vector<double> obs(sample.begin(), sample.end());
    // Drift of the unit-diffusion transform Y = integral ds/sigma:
    //   b(s) = mu/sigma - sigma_s/2, evaluated through the original state.
    ObjectiveFn obj = [obs = std::move(obs), &model, delta](const Eigen::VectorXd& th) {
        auto b = [&](double s) {
            return model.drift(s, th) / model.diffusion(s, th) -
                   0.5 * d_ds(model.diffusion, s, th);
        };
        double ll = 0.0;
        for (std::size_t n = 0; n + 1 < obs.size(); ++n) {
            const double s = obs[n];
            const double sig = model.diffusion(s, th);
            const double bs = b(s);
            // y-space derivatives: d/dy = sigma(s) d/ds.
            const double h = 1e-4 * (1.0 + std::abs(s));
            const double b_p = (b(s + h) - b(s - h)) / (2.0 * h);
            const double b_pp = (b(s + h) - 2.0 * bs + b(s - h)) / (h * h);
            const double lin = sig * b_p;                                   // L_s
            const double curv = 0.5 * sig * (d_ds(model.diffusion, s, th) * b_p + sig * b_pp);

            double mean_incr, var;
            if (std::abs(lin * delta) < 1e-8) {
                mean_incr = bs * delta + curv * delta * delta * 0.5;
                var = delta;
            } else {
                const double e = std::exp(lin * delta);
                mean_incr = bs * (e - 1.0) / lin + curv * (e - 1.0 - lin * delta) / (lin * lin);
                var = (e * e - 1.0) / (2.0 * lin);
            }
            var = std::max(var, kVarFloor);
            const double dy = lamperti_increment(model, s, obs[n + 1], th);
            ll += gaussian_loglik(dy, mean_incr, var) - std::log(model.diffusion(obs[n + 1], th));
        }
        return ll;
    };
    return run_generic("shoji-ozaki", obj, theta0, options);
}

EstimationResult estimate(const std::string& method, std::span<const double> sample,
                          const DiffusionModel& model, double delta, const ParamVector& theta0,
                          const EstimatorOptions& options) {
    if (method == "ctmc") return ctmc_mle(sample, model, delta, theta0, options);
    if (method == "exact") return exact_mle(sample, model, delta, theta0, options);
    if (method == "euler") return euler_mle(sample, model, delta, theta0, options);
    if (method == "kessler") return kessler_mle(sample, model, delta, theta0, options);
    if (method == "shoji-ozaki") return shoji_ozaki_mle(sample, model, delta, theta0, options);
    throw ConfigError("unknown method '" + method +
                      "' (expected ctmc, exact, euler, kessler, shoji-ozaki)");
}

} // namespace ctmle
