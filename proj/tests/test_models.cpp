#include <cmath>
#include <vector>

#include "ctmle/models.hpp"
#include "ctmle/rng.hpp"
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

// Composite Simpson quadrature on [a, b].
template <class F>
double simpson(F f, double a, double b, int n) {
    if (n % 2) ++n;
    const double h = (b - a) / n;
    double acc = f(a) + f(b);
    for (int i = 1; i < n; ++i) acc += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return acc * h / 3.0;
}

// Naive power series for exp(-x) * I_nu(x); independent of the library route.
double bessel_series_scaled(double nu, double x) {
    double term = std::exp(nu * std::log(0.5 * x) - std::lgamma(nu + 1.0));
    double sum = term;
    for (int k = 1; k < 200; ++k) {
        term *= 0.25 * x * x / (k * (k + nu));
        sum += term;
        if (term < 1e-18 * sum) break;
    }
    return sum * std::exp(-x);
}

} // namespace

TEST_CASE("gbm density closed-form point value") {
    // With mu = sigma^2/2 the log-mean drift vanishes: p(1, 1, 1) = 1/(sigma sqrt(2 pi)).
    const double sigma = 0.37;
    const auto th = theta({0.5 * sigma * sigma, sigma});
    CHECK(gbm_density(1.0, 1.0, 1.0, th) ==
          doctest::Approx(1.0 / (sigma * std::sqrt(2.0 * M_PI))).epsilon(1e-14));
}

TEST_CASE("gbm density integrates to one") {
    const auto th = theta({0.03, 0.15});
    const double delta = 1.0 / 250.0, s = 100.0;
    // Integrate in log-space where the density is Gaussian; +-8 sd covers it.
    const double sd = th[1] * std::sqrt(delta);
    const double mean = std::log(s) + (th[0] - 0.5 * th[1] * th[1]) * delta;
    auto f = [&](double y) { return gbm_density(delta, std::exp(y), s, th) * std::exp(y); };
    const double integral = simpson(f, mean - 8 * sd, mean + 8 * sd, 4000);
    CHECK(integral == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("gbm density is unimodal around the drifted mean") {
    const auto th = theta({0.08, 0.3});
    const double delta = 0.1, s = 10.0;
    const double sd = th[1] * std::sqrt(delta);
    const double mode_ish = s * std::exp((th[0] - 0.5 * th[1] * th[1]) * delta);
    const double far = mode_ish * std::exp(2.0 * sd);
    CHECK(gbm_density(delta, mode_ish, s, th) > gbm_density(delta, far, s, th));
}

TEST_CASE("ou density mean is the fixed point at s = mu") {
    const auto th = theta({4.0, 0.2, 0.4});
    const double delta = 1.0 / 52.0;
    // Density symmetric about 0.2: p(0.2+h) == p(0.2-h).
    CHECK(ou_density(delta, 0.25, 0.2, th) ==
          doctest::Approx(ou_density(delta, 0.15, 0.2, th)).epsilon(1e-13));
    // Quadrature over +-10 conditional sd.
    const double var = th[2] * th[2] / (2 * th[0]) * (1 - std::exp(-2 * th[0] * delta));
    const double w = 10.0 * std::sqrt(var);
    auto f = [&](double x) { return ou_density(delta, x, 0.2, th); };
    CHECK(simpson(f, 0.2 - w, 0.2 + w, 4000) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("ou density concentrates at mu as kappa grows") {
    const double delta = 0.5, s = 1.0;
    const double p_small = ou_density(delta, 0.2, s, theta({2.0, 0.2, 0.4}));
    const double p_large = ou_density(delta, 0.2, s, theta({50.0, 0.2, 0.4}));
    CHECK(p_large > p_small);
}

TEST_CASE("ou density kappa=0 reduces to Brownian motion") {
    const auto th = theta({0.0, 0.7, 0.4});
    const double delta = 0.25, s = 1.3, sp = 1.1;
    const double var = th[2] * th[2] * delta;
    const double expected =
        std::exp(-0.5 * (sp - s) * (sp - s) / var) / std::sqrt(2.0 * M_PI * var);
    CHECK(ou_density(delta, sp, s, th) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("scaled bessel matches a naive series") {
    for (double nu : {0.0, 0.5, 2.3, 6.0}) {
        for (double x : {0.3, 1.0, 5.0}) {
            CHECK(scaled_bessel_i(nu, x) ==
                  doctest::Approx(bessel_series_scaled(nu, x)).epsilon(1e-12));
        }
    }
    // Negative non-integer order goes through the K_nu reflection.
    for (double x : {0.3, 1.0, 5.0}) {
        CHECK(scaled_bessel_i(-0.4, x) ==
              doctest::Approx(bessel_series_scaled(-0.4, x)).epsilon(1e-12));
    }
}

TEST_CASE("cir density integrates to one") {
    const auto th = theta({2.0, 0.2, 0.15});
    const double delta = 1.0 / 52.0, s = 0.2;
    auto f = [&](double x) { return cir_density(delta, x, s, th); };
    CHECK(simpson(f, 1e-9, 2.0, 200000) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("cir density stays finite near zero when d > 2") {
    const auto th = theta({2.0, 0.2, 0.15}); // d = 4 k mu / sigma^2 = 71.1
    CHECK(std::isfinite(cir_density(1.0 / 52.0, 1e-8, 0.2, th)));
    CHECK(cir_density(1.0 / 52.0, 1e-8, 0.2, th) < 1e-10);
}

TEST_CASE("cir density matches the exact-sampling histogram") {
    const auto th = theta({2.0, 0.2, 0.15});
    const double delta = 1.0 / 12.0, s = 0.18;
    // Numeric CDF of the transition density on a fine grid.
    const int grid_n = 4000;
    const double lo = 1e-9, hi = 0.6;
    std::vector<double> xs(grid_n + 1), cdf(grid_n + 1, 0.0);
    for (int i = 0; i <= grid_n; ++i) xs[i] = lo + (hi - lo) * i / grid_n;
    for (int i = 1; i <= grid_n; ++i) {
        const double a = xs[i - 1], b = xs[i];
        cdf[i] = cdf[i - 1] + 0.5 * (b - a) * (cir_density(delta, a, s, th) +
                                               cir_density(delta, b, s, th));
    }
    auto cdf_at = [&](double x) {
        if (x <= lo) return 0.0;
        if (x >= hi) return cdf[grid_n];
        const double u = (x - lo) / (hi - lo) * grid_n;
        const int i = static_cast<int>(u);
        return cdf[i] + (u - i) * (cdf[i + 1] - cdf[i]);
    };
    // 10^6 exact draws via the noncentral chi-square transition.
    const int n_draws = 1000000;
    const double kappa = th[0], mu = th[1], sigma = th[2];
    const double em = std::exp(-kappa * delta);
    const double c = sigma * sigma * (1.0 - em) / (4.0 * kappa);
    const double dof = 4.0 * kappa * mu / (sigma * sigma);
    const double lambda = s * em / c;
    CounterRng rng(20240817, 0);
    std::vector<double> draws(n_draws);
    for (int i = 0; i < n_draws; ++i) draws[i] = c * sample_noncentral_chi2(rng, dof, lambda);
    std::sort(draws.begin(), draws.end());
    double ks = 0.0;
    for (int i = 0; i < n_draws; i += 37) { // subsample for speed; KS stat is smooth
        const double emp = (i + 0.5) / n_draws;
        ks = std::max(ks, std::abs(emp - cdf_at(draws[i])));
    }
    CHECK(ks <= 0.01);
}

TEST_CASE("ckls diffusion-squared partial in the exponent vanishes at s = 1") {
    const auto m = make_ckls();
    CHECK(m.diffusion_sq_partial(1.0, theta({0.1, -0.2, 0.5, 0.8}), 3) == 0.0);
}

TEST_CASE("hyperbolic drift vanishes at the origin") {
    const auto m = make_hyperbolic();
    CHECK(m.drift(0.0, theta({3.0, 0.4})) == 0.0);
}

TEST_CASE("builtin analytic partials match finite differences") {
    CounterRng rng(11, 0);
    for (const auto& m : builtin_models()) {
        const auto box = m.default_box();
        for (int rep = 0; rep < 5; ++rep) {
            Eigen::VectorXd th(m.dim);
            for (int i = 0; i < m.dim; ++i)
                th[i] = box.lower[i] + (box.upper[i] - box.lower[i]) * rng.uniform();
            const double s = m.positive_domain() ? 0.3 + rng.uniform() : -1.0 + 2.0 * rng.uniform();
            for (int u = 0; u < m.dim; ++u) {
                const double h = 1e-6 * (1.0 + std::abs(th[u]));
                Eigen::VectorXd tp = th, tm = th;
                tp[u] += h;
                tm[u] -= h;
                const double fd_mu = (m.drift(s, tp) - m.drift(s, tm)) / (2 * h);
                const double fd_s2 = (m.diffusion_sq(s, tp) - m.diffusion_sq(s, tm)) / (2 * h);
                CHECK(m.drift_partial(s, th, u) == doctest::Approx(fd_mu).epsilon(1e-6));
                CHECK(m.diffusion_sq_partial(s, th, u) == doctest::Approx(fd_s2).epsilon(1e-6));
            }
        }
    }
}

TEST_CASE("with_fd_partials fills missing derivatives") {
    DiffusionModel m = make_gbm();
    m.drift_partial = nullptr;
    m.diffusion_sq_partial = nullptr;
    m = with_fd_partials(m);
    const auto th = theta({0.1, 0.3});
    CHECK(m.drift_partial(2.0, th, 0) == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(m.diffusion_sq_partial(2.0, th, 1) == doctest::Approx(2 * 0.3 * 4.0).epsilon(1e-6));
}

TEST_CASE("find_model rejects unknown names") {
    CHECK_THROWS_AS(find_model("heston"), ConfigError);
    CHECK(find_model("cir").name == "cir");
    CHECK(builtin_models().size() == 5);
}
