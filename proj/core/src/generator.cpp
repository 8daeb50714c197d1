#include "ctmle/generator.hpp"

#include <cmath>

#include "ctmle/errors.hpp"

namespace ctmle {

GeneratorResult build_generator(const DiffusionModel& model, const Eigen::VectorXd& theta,
                                const StateSpace& grid, Boundary boundary, bool strict) {
    const int m = grid.m;
    GeneratorResult out;
    out.q = Tridiagonal::zero(m);
    out.sub_clamped.assign(m - 1, false);
    out.super_clamped.assign(m - 1, false);

    auto clamp_rate = [&](double r, std::vector<bool>& mask, int idx) {
        if (r >= 0.0) return r;
        if (strict)
            throw NumericalError("build_generator: grid-step condition violated (negative rate)");
        ++out.violations;
        mask[idx] = true;
        return 0.0;
    };

    for (int i = 1; i + 1 < m; ++i) {
        const double s = grid.points[i];
        const double k_lo = grid.steps[i - 1];
        const double k_hi = grid.steps[i];
        const double mu = model.drift(s, theta);
        const double mup = std::max(mu, 0.0);
        const double mum = std::max(-mu, 0.0);
        const double sig2 = model.diffusion_sq(s, theta);
        const double common = sig2 - (k_lo * mum + k_hi * mup);

        double lo_rate = mum / k_lo + common / (k_lo * (k_lo + k_hi));
        double hi_rate = mup / k_hi + common / (k_hi * (k_lo + k_hi));
        lo_rate = clamp_rate(lo_rate, out.sub_clamped, i - 1);   // Q(i, i-1)
        hi_rate = clamp_rate(hi_rate, out.super_clamped, i);     // Q(i, i+1)

        out.q.sub[i - 1] = lo_rate;
        out.q.super[i] = hi_rate;
        out.q.diag[i] = -(lo_rate + hi_rate);
    }

    if (boundary == Boundary::Reflect) {
        const double s0 = grid.points[0];
        const double k0 = grid.steps[0];
        const double up = model.diffusion_sq(s0, theta) / (k0 * k0) +
                          std::max(model.drift(s0, theta), 0.0) / k0;
        out.q.super[0] = up;
        out.q.diag[0] = -up;

        const double sm = grid.points[m - 1];
        const double km = grid.steps[m - 2];
        const double dn = model.diffusion_sq(sm, theta) / (km * km) +
                          std::max(-model.drift(sm, theta), 0.0) / km;
        out.q.sub[m - 2] = dn;
        out.q.diag[m - 1] = -dn;
    }
    // Absorbing: boundary rows stay zero.
    return out;
}

Tridiagonal generator_partial(const DiffusionModel& model, const Eigen::VectorXd& theta,
                              const StateSpace& grid, int u, Boundary boundary,
                              const GeneratorResult& gen) {
    const int m = grid.m;
    Tridiagonal out = Tridiagonal::zero(m);

    // Positive/negative part partials via sign(mu); zero at mu == 0.
    auto part_partials = [&](double s, double& dmup, double& dmum) {
        const double mu = model.drift(s, theta);
        const double dmu = model.drift_partial(s, theta, u);
        dmup = mu > 0.0 ? dmu : 0.0;
        dmum = mu < 0.0 ? -dmu : 0.0;
    };

    for (int i = 1; i + 1 < m; ++i) {
        const double s = grid.points[i];
        const double k_lo = grid.steps[i - 1];
        const double k_hi = grid.steps[i];
        double dmup, dmum;
        part_partials(s, dmup, dmum);
        const double dsig2 = model.diffusion_sq_partial(s, theta, u);
        const double dcommon = dsig2 - (k_lo * dmum + k_hi * dmup);

        double d_lo = dmum / k_lo + dcommon / (k_lo * (k_lo + k_hi));
        double d_hi = dmup / k_hi + dcommon / (k_hi * (k_lo + k_hi));
        if (gen.sub_clamped[i - 1]) d_lo = 0.0;
        if (gen.super_clamped[i]) d_hi = 0.0;

        out.sub[i - 1] = d_lo;
        out.super[i] = d_hi;
        out.diag[i] = -(d_lo + d_hi);
    }

    if (boundary == Boundary::Reflect) {
        double dmup, dmum;
        const double k0 = grid.steps[0];
        part_partials(grid.points[0], dmup, dmum);
        const double d_up =
            model.diffusion_sq_partial(grid.points[0], theta, u) / (k0 * k0) + dmup / k0;
        out.super[0] = d_up;
        out.diag[0] = -d_up;

        const double km = grid.steps[m - 2];
        part_partials(grid.points[m - 1], dmup, dmum);
        const double d_dn =
            model.diffusion_sq_partial(grid.points[m - 1], theta, u) / (km * km) + dmum / km;
        out.sub[m - 2] = d_dn;
        out.diag[m - 1] = -d_dn;
    }
    return out;
}

} // namespace ctmle
