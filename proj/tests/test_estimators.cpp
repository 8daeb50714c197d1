#include <cmath>
#include <vector>

#include "ctmle/estimators.hpp"
#include "ctmle/simulate.hpp"
#include "doctest.h"

using namespace ctmle;

namespace {

Eigen::VectorXd theta(std::initializer_list<double> v) {
    Eigen::VectorXd out(static_cast<int>(v.size()));
    int i = 0;
    for (double x : v) out[i++] = x;
    return out;
}

ParamVector pv(std::initializer_list<double> v, std::initializer_list<double> lo,
               std::initializer_list<double> hi) {
    return ParamVector(theta(v), theta(lo), theta(hi));
}

std::vector<double> sim(const char* model, std::initializer_list<double> th, double s0, int n,
                        double delta, std::uint64_t seed) {
    SimulationConfig cfg;
    cfg.model = find_model(model);
    cfg.theta = theta(th);
    cfg.s0 = s0;
    cfg.delta = delta;
    cfg.n = n;
    cfg.scheme = Scheme::Exact;
    cfg.seed = seed;
    return simulate_path(cfg);
}

EstimatorOptions tight_options() {
    // Large samples make |L| big, so the default finite-difference step is
    // dominated by round-off; widen it and demand a small absolute gradient.
    EstimatorOptions opt;
    opt.optim.grad_tol_rel = 0.0;
    opt.optim.grad_tol_abs = 3e-5;
    opt.optim.fd_rel_step = 2e-5;
    return opt;
}

// Arithmetic Brownian motion dS = theta0 dt + theta1 dW: the Gaussian step
// density is exact, so the Euler and Kessler pseudo-likelihoods coincide
// with the exact likelihood.
DiffusionModel make_abm() {
    DiffusionModel m;
    m.name = "abm";
    m.dim = 2;
    m.drift = [](double, const Eigen::VectorXd& th) { return th[0]; };
    m.diffusion = [](double, const Eigen::VectorXd& th) { return th[1]; };
    m.exact_density = [](double delta, double sp, double s, const Eigen::VectorXd& th) {
        const double var = th[1] * th[1] * delta;
        return std::exp(-0.5 * (sp - s - th[0] * delta) * (sp - s - th[0] * delta) / var) /
               std::sqrt(2.0 * M_PI * var);
    };
    return with_fd_partials(m);
}

} // namespace

TEST_CASE("exact mle on gbm matches the closed-form estimator") {
    const double delta = 1.0 / 250.0;
    const auto path = sim("gbm", {0.05, 0.2}, 50.0, 2000, delta, 101);
    // Log-increments are iid Gaussian; the likelihood maximum has a closed form.
    const int n = static_cast<int>(path.size()) - 1;
    double mean = 0.0;
    for (int i = 0; i < n; ++i) mean += std::log(path[i + 1] / path[i]);
    mean /= n;
    double var = 0.0;
    for (int i = 0; i < n; ++i) {
        const double d = std::log(path[i + 1] / path[i]) - mean;
        var += d * d;
    }
    var /= n; // maximum-likelihood variance, not the unbiased one
    const double sigma_hat = std::sqrt(var / delta);
    const double mu_hat = mean / delta + 0.5 * sigma_hat * sigma_hat;

    const auto res = exact_mle(path, find_model("gbm"), delta,
                               pv({0.0, 0.3}, {-0.5, 0.05}, {0.5, 0.5}), tight_options());
    CHECK(res.converged);
    CHECK(res.theta_hat.values[0] == doctest::Approx(mu_hat).epsilon(1e-5));
    CHECK(res.theta_hat.values[1] == doctest::Approx(sigma_hat).epsilon(1e-6));
}

TEST_CASE("exact mle on ou matches the ar(1) regression estimator") {
    const double delta = 1.0 / 250.0;
    const auto path = sim("ou", {4.0, 0.2, 0.4}, 0.2, 1250, delta, 77);
    // The discretely observed process is an AR(1); its MLE is the OLS fit of
    // s' on s plus the ML residual variance.
    const int n = static_cast<int>(path.size()) - 1;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
        sx += path[i];
        sy += path[i + 1];
        sxx += path[i] * path[i];
        sxy += path[i] * path[i + 1];
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double intercept = (sy - slope * sx) / n;
    double rss = 0;
    for (int i = 0; i < n; ++i) {
        const double r = path[i + 1] - intercept - slope * path[i];
        rss += r * r;
    }
    const double v = rss / n;
    const double kappa_hat = -std::log(slope) / delta;
    const double mu_hat = intercept / (1.0 - slope);
    const double sigma_hat = std::sqrt(2.0 * kappa_hat * v / (1.0 - slope * slope));

    const auto res = exact_mle(path, find_model("ou"), delta,
                               pv({2.0, 0.0, 0.2}, {0.1, -1.0, 0.01}, {20.0, 1.0, 2.0}),
                               tight_options());
    CHECK(res.converged);
    CHECK(res.theta_hat.values[0] == doctest::Approx(kappa_hat).epsilon(1e-5));
    CHECK(res.theta_hat.values[1] == doctest::Approx(mu_hat).epsilon(1e-5));
    CHECK(res.theta_hat.values[2] == doctest::Approx(sigma_hat).epsilon(1e-5));
}

TEST_CASE("euler equals exact on arithmetic brownian motion") {
    const auto m = make_abm();
    SimulationConfig cfg;
    cfg.model = m;
    cfg.theta = theta({0.3, 0.8});
    cfg.s0 = 0.0;
    cfg.delta = 0.01;
    cfg.n = 800;
    cfg.scheme = Scheme::Euler;
    cfg.substeps = 1; // one Euler step per observation is already exact here
    cfg.seed = 13;
    const auto path = simulate_path(cfg);
    const auto start = pv({0.0, 1.0}, {-5.0, 0.01}, {5.0, 5.0});
    const auto r_euler = euler_mle(path, m, cfg.delta, start, tight_options());
    const auto r_exact = exact_mle(path, m, cfg.delta, start, tight_options());
    const auto r_kessler = kessler_mle(path, m, cfg.delta, start, tight_options());
    CHECK(r_euler.converged);
    CHECK(r_euler.loglik == doctest::Approx(r_exact.loglik).epsilon(1e-10));
    CHECK((r_euler.theta_hat.values - r_exact.theta_hat.values).cwiseAbs().maxCoeff() <= 1e-6);
    // Kessler's second-order terms vanish for constant coefficients.
    CHECK((r_kessler.theta_hat.values - r_exact.theta_hat.values).cwiseAbs().maxCoeff() <= 1e-5);
    CHECK(r_kessler.variance_floors == 0);
}

TEST_CASE("euler pseudo-likelihood value matches a hand sum") {
    const std::vector<double> sample{1.0, 1.1, 0.95};
    const auto m = make_abm();
    const auto start = pv({0.2, 0.5}, {-5.0, 0.01}, {5.0, 5.0});
    const auto res = euler_mle(sample, m, 0.25, start, tight_options());
    // Recompute the Gaussian sum at the returned estimate by hand.
    const double mu = res.theta_hat.values[0], sg = res.theta_hat.values[1];
    double hand = 0.0;
    for (int i = 0; i < 2; ++i) {
        const double var = sg * sg * 0.25;
        const double resid = sample[i + 1] - sample[i] - mu * 0.25;
        hand += -0.5 * std::log(2.0 * M_PI * var) - 0.5 * resid * resid / var;
    }
    CHECK(res.loglik == doctest::Approx(hand).epsilon(1e-12));
}

TEST_CASE("shoji-ozaki is exact for the linear mean-reverting model") {
    const double delta = 1.0 / 52.0;
    const auto path = sim("ou", {4.0, 0.2, 0.4}, 0.2, 800, delta, 55);
    const auto start = pv({2.0, 0.0, 0.2}, {0.1, -1.0, 0.01}, {20.0, 1.0, 2.0});
    const auto r_so = shoji_ozaki_mle(path, find_model("ou"), delta, start, tight_options());
    const auto r_exact = exact_mle(path, find_model("ou"), delta, start, tight_options());
    CHECK(r_so.converged);
    // Local linearization reproduces the exact Gaussian moments of a linear
    // SDE; derivative steps in the implementation leave ~1e-4 slack.
    CHECK((r_so.theta_hat.values - r_exact.theta_hat.values).cwiseAbs().maxCoeff() <= 1e-4);
}

TEST_CASE("chain mle agrees with exact mle on a mean-reverting sample") {
    const double delta = 1.0 / 250.0;
    const auto path = sim("ou", {4.0, 0.2, 0.4}, 0.2, 1250, delta, 303);
    const auto start = pv({2.0, 0.0, 0.2}, {0.5, -1.0, 0.05}, {10.0, 1.0, 1.0});
    const auto r_ctmc = ctmc_mle(path, find_model("ou"), delta, start);
    const auto r_exact = exact_mle(path, find_model("ou"), delta, start, tight_options());
    CHECK(r_ctmc.converged);
    CHECK(r_ctmc.method == "ctmc");
    CHECK(std::abs(r_ctmc.theta_hat.values[2] - r_exact.theta_hat.values[2]) <= 5e-3);
    CHECK(std::abs(r_ctmc.theta_hat.values[1] - r_exact.theta_hat.values[1]) <= 1e-2);
    CHECK(std::abs(r_ctmc.theta_hat.values[0] - r_exact.theta_hat.values[0]) <= 0.5);
    CHECK(r_ctmc.grad_norm <= 1e-5 * (1.0 + std::abs(r_ctmc.loglik)));
}

TEST_CASE("dispatch and error taxonomy") {
    const auto path = sim("gbm", {0.05, 0.2}, 1.0, 50, 0.01, 1);
    const auto start = pv({0.0, 0.3}, {-0.5, 0.05}, {0.5, 0.5});
    CHECK_THROWS_AS(estimate("bogus", path, find_model("gbm"), 0.01, start), ConfigError);
    CHECK_THROWS_AS(exact_mle(path, find_model("ckls"), 0.01,
                              pv({0.1, 0.0, 0.5, 0.5}, {0.0, -2.0, 0.01, 0.1},
                                 {1.0, 2.0, 2.0, 1.5})),
                    ConfigError);
    const std::vector<double> single{1.0};
    CHECK_THROWS_AS(ctmc_mle(single, find_model("gbm"), 0.01, start), DataError);
    CHECK(estimate("euler", path, find_model("gbm"), 0.01, start).method == "euler");
}

TEST_CASE("grid-condition violations: clamped by default, fatal in strict mode") {
    // A start with strong drift against a tiny volatility violates the grid
    // step condition over most of the sample range.
    const auto path = sim("ou", {4.0, 0.2, 0.4}, 0.2, 400, 1.0 / 250.0, 9);
    const auto start = pv({10.0, 0.9, 0.05}, {0.5, -1.0, 0.05}, {10.0, 1.0, 1.0});
    EstimatorOptions opt;
    opt.m = 100;
    SUBCASE("default mode clamps, counts, and still estimates") {
        const auto res = ctmc_mle(path, find_model("ou"), 1.0 / 250.0, start, opt);
        CHECK(res.clamp_violations > 0);
        CHECK(res.converged);
    }
    SUBCASE("strict mode raises instead of clamping") {
        opt.strict_grid = true;
        CHECK_THROWS_AS(ctmc_mle(path, find_model("ou"), 1.0 / 250.0, start, opt),
                        NumericalError);
    }
}
