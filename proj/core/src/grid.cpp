#include "ctmle/grid.hpp"

#include <algorithm>
#include <cmath>

#include "ctmle/errors.hpp"

namespace ctmle {

StateSpace build_grid(std::span<const double> sample, int m, double pad_fraction, double domain_lo,
                      double domain_hi) {
    if (m < 3) throw ConfigError("build_grid: m must be >= 3");
    if (sample.size() < 2) throw DataError("build_grid: sample must have >= 2 observations");
    if (pad_fraction < 0.0) throw ConfigError("build_grid: pad_fraction must be >= 0");

    const auto [mn_it, mx_it] = std::minmax_element(sample.begin(), sample.end());
    const double mn = *mn_it, mx = *mx_it;
    if (!(mx > mn))
        throw DataError(
            "build_grid: degenerate sample (max == min); supply a minimum grid width by padding "
            "the data or widening the domain");

    const double range = mx - mn;
    double lo = mn - pad_fraction * range;
    double hi = mx + pad_fraction * range;
    if (domain_lo >= 0.0) {
        const double eps = 1e-4 * std::max(std::abs(mn), std::abs(mx));
        lo = std::max(lo, std::max(domain_lo, 0.0) + eps);
    } else {
        lo = std::max(lo, domain_lo);
    }
    hi = std::min(hi, domain_hi);
    if (!(hi > lo)) throw DataError("build_grid: empty grid interval after domain clipping");

    StateSpace g;
    g.m = m;
    g.points = Eigen::VectorXd::LinSpaced(m, lo, hi);
    g.steps = g.points.tail(m - 1) - g.points.head(m - 1);
    return g;
}

BinnedSample bin_sample(std::span<const double> sample, const StateSpace& grid, double delta) {
    if (sample.empty()) throw DataError("bin_sample: empty sample");

    BinnedSample out;
    out.delta = delta;
    out.indices.reserve(sample.size());
    const auto [mn_it, mx_it] = std::minmax_element(sample.begin(), sample.end());
    out.raw_range = {*mn_it, *mx_it};

    const double* pts = grid.points.data();
    const int m = grid.m;
    for (double x : sample) {
        if (x <= pts[0]) {
            out.indices.push_back(0);
            if (x < pts[0]) ++out.clipped;
            continue;
        }
        if (x >= pts[m - 1]) {
            out.indices.push_back(m - 1);
            if (x > pts[m - 1]) ++out.clipped;
            continue;
        }
        // First grid point >= x; candidate neighbors are j-1 and j.
        const double* it = std::lower_bound(pts, pts + m, x);
        int j = static_cast<int>(it - pts);
        const double d_lo = x - pts[j - 1];
        const double d_hi = pts[j] - x;
        out.indices.push_back(d_lo <= d_hi ? j - 1 : j); // ties break low
    }
    return out;
}

} // namespace ctmle
