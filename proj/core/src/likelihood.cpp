#include "ctmle/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "ctmle/errors.hpp"

namespace ctmle {

TransitionCounts count_matrix(const BinnedSample& binned, int m) {
    if (binned.indices.size() < 2)
        throw DataError("count_matrix: need at least two observations");

    std::map<std::pair<int, int>, long> acc;
    for (std::size_t n = 0; n + 1 < binned.indices.size(); ++n)
        ++acc[{binned.indices[n], binned.indices[n + 1]}];

    TransitionCounts c;
    c.m = m;
    c.row_totals = Eigen::VectorXd::Zero(m);
    c.entries.reserve(acc.size());
    for (const auto& [key, count] : acc) {
        c.entries.push_back({key.first, key.second, count});
        c.row_totals[key.first] += static_cast<double>(count);
        c.bandwidth = std::max(c.bandwidth, std::abs(key.first - key.second));
        c.total += count;
    }
    return c;
}

Eigen::MatrixXd fisher_hessian(const Eigen::VectorXd& row_totals, const Eigen::MatrixXd& t,
                               const std::vector<Eigen::MatrixXd>& dt, int bandwidth, int margin,
                               double floor) {
    const int d = static_cast<int>(dt.size());
    const int m = static_cast<int>(t.rows());
    const int width = bandwidth + margin;
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(d, d);
    for (int i = 0; i < m; ++i) {
        const double ci = row_totals[i];
        if (ci <= 0.0) continue;
        const int j_lo = std::max(0, i - width);
        const int j_hi = std::min(m - 1, i + width);
        for (int j = j_lo; j <= j_hi; ++j) {
            const double w = ci / std::max(t(i, j), floor);
            for (int u = 0; u < d; ++u) {
                const double du = dt[u](i, j);
                for (int v = u; v < d; ++v) h(u, v) -= w * du * dt[v](i, j);
            }
        }
    }
    return h.selfadjointView<Eigen::Upper>();
}

LikelihoodWorkspace::LikelihoodWorkspace(DiffusionModel model, StateSpace grid,
                                         TransitionCounts counts, double delta, Boundary boundary,
                                         bool strict)
    : model_(std::move(model)), grid_(std::move(grid)), counts_(std::move(counts)), delta_(delta),
      boundary_(boundary), strict_(strict) {
    if (delta_ <= 0.0) throw ConfigError("LikelihoodWorkspace: delta must be > 0");
    if (counts_.m != grid_.m) throw ConfigError("LikelihoodWorkspace: grid/counts size mismatch");
}

void LikelihoodWorkspace::ensure(const Eigen::VectorXd& theta) {
    if (cached_theta_.size() == theta.size() && cached_theta_ == theta) return;
    gen_ = build_generator(model_, theta, grid_, boundary_, strict_);
    clamp_violations_ += gen_.violations;
    decomp_valid_ = true;
    try {
        decomp_ = eig(gen_.q);
        if (decomp_.used_fallback) ++eig_fallbacks_;
        t_ = transition_matrix(decomp_, delta_);
    } catch (const NumericalError&) {
        // Defective or ill-conditioned decomposition (heavily clamped
        // generators): keep the likelihood usable through the dense
        // exponential; spectral derivatives are unavailable at this theta.
        decomp_valid_ = false;
        ++expm_retries_;
        t_ = expm_transition(gen_.q, delta_);
    }
    has_x_ = false;
    cached_theta_ = theta;
}

const Eigen::MatrixXd& LikelihoodWorkspace::x_cache() {
    if (!has_x_) {
        x_ = x_matrix(decomp_.eigenvalues, delta_);
        has_x_ = true;
    }
    return x_;
}

double LikelihoodWorkspace::log_likelihood(const Eigen::VectorXd& theta) {
    ensure(theta);
    double ll = 0.0;
    for (const auto& e : counts_.entries)
        ll += static_cast<double>(e.count) * std::log(std::max(t_(e.i, e.j), kProbFloor));
    return ll;
}

const Eigen::MatrixXd& LikelihoodWorkspace::transition(const Eigen::VectorXd& theta) {
    ensure(theta);
    return t_;
}

const SpectralDecomp& LikelihoodWorkspace::decomposition(const Eigen::VectorXd& theta) {
    ensure(theta);
    if (!decomp_valid_)
        throw NumericalError("LikelihoodWorkspace: no usable decomposition at this theta");
    return decomp_;
}

Eigen::MatrixXd LikelihoodWorkspace::transition_theta_partial(const Eigen::VectorXd& theta, int u) {
    ensure(theta);
    if (!decomp_valid_)
        throw NumericalError("LikelihoodWorkspace: no usable decomposition at this theta");
    const Tridiagonal dq = generator_partial(model_, theta, grid_, u, boundary_, gen_);
    return transition_partial(decomp_, x_cache(), dq);
}

Eigen::VectorXd LikelihoodWorkspace::gradient(const Eigen::VectorXd& theta) {
    ensure(theta);
    if (!decomp_valid_) {
        // Central differences of the (expm-based) likelihood keep the
        // optimizer moving where the spectral route is unavailable.
        Eigen::VectorXd g(model_.dim);
        for (int u = 0; u < model_.dim; ++u) {
            const double h = 1e-6 * (1.0 + std::abs(theta[u]));
            Eigen::VectorXd tp = theta, tm = theta;
            tp[u] += h;
            tm[u] -= h;
            g[u] = (log_likelihood(tp) - log_likelihood(tm)) / (2.0 * h);
        }
        ensure(theta);
        return g;
    }
    const int m = grid_.m;

    // D = C ./ T on the support of C, zero elsewhere.
    Eigen::MatrixXd d_mat = Eigen::MatrixXd::Zero(m, m);
    for (const auto& e : counts_.entries)
        d_mat(e.i, e.j) = static_cast<double>(e.count) / std::max(t_(e.i, e.j), kProbFloor);

    // Z = U ((V^T D U) o X) V^T; then dL/dtheta_u = sum (dQ_u o Z) over the
    // tridiagonal support of dQ_u.
    const Eigen::MatrixXd inner =
        ((decomp_.V.transpose() * d_mat) * decomp_.U).cwiseProduct(x_cache());
    const Eigen::MatrixXd z = (decomp_.U * inner) * decomp_.V.transpose();

    Eigen::VectorXd g(model_.dim);
    for (int u = 0; u < model_.dim; ++u) {
        const Tridiagonal dq = generator_partial(model_, theta, grid_, u, boundary_, gen_);
        double s = 0.0;
        for (int i = 0; i < m; ++i) s += dq.diag[i] * z(i, i);
        for (int i = 0; i + 1 < m; ++i)
            s += dq.super[i] * z(i, i + 1) + dq.sub[i] * z(i + 1, i);
        g[u] = s;
    }
    return g;
}

Eigen::MatrixXd LikelihoodWorkspace::approx_hessian(const Eigen::VectorXd& theta) {
    ensure(theta);
    if (!decomp_valid_) {
        // Gradient-ascent surrogate; the damped Newton step reduces to a
        // scaled gradient step until the iterate leaves the bad region.
        return -Eigen::MatrixXd::Identity(model_.dim, model_.dim);
    }
    std::vector<Eigen::MatrixXd> dt;
    dt.reserve(model_.dim);
    for (int u = 0; u < model_.dim; ++u) {
        const Tridiagonal dq = generator_partial(model_, theta, grid_, u, boundary_, gen_);
        dt.push_back(transition_partial(decomp_, x_cache(), dq));
    }
    return fisher_hessian(counts_.row_totals, t_, dt, counts_.bandwidth, kHessianMargin);
}

} // namespace ctmle
