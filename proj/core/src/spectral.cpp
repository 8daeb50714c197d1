#include "ctmle/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "ctmle/errors.hpp"

namespace ctmle {

namespace {

// Log-scale similarity transform bound; beyond this exp(w) is not safe.
constexpr double kMaxLogScale = 650.0;

SpectralDecomp eig_general_once(const Eigen::MatrixXd& a) {
    Eigen::EigenSolver<Eigen::MatrixXd> solver(a);
    if (solver.info() != Eigen::Success)
        throw NumericalError("eig: general eigensolver failed to converge");

    const int m = static_cast<int>(a.rows());
    Eigen::VectorXd vals = solver.eigenvalues().real();
    Eigen::MatrixXd vecs = solver.eigenvectors().real();

    std::vector<int> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return vals[a] > vals[b]; });

    SpectralDecomp d;
    d.used_fallback = true;
    d.eigenvalues.resize(m);
    d.V.resize(m, m);
    for (int j = 0; j < m; ++j) {
        d.eigenvalues[j] = vals[order[j]];
        d.V.col(j) = vecs.col(order[j]);
    }
    d.U = d.V.transpose().partialPivLu().solve(Eigen::MatrixXd::Identity(m, m)).transpose();
    d.min_gap = m > 1 ? (d.eigenvalues.head(m - 1) - d.eigenvalues.tail(m - 1)).minCoeff() : 0.0;
    return d;
}

SpectralDecomp eig_general(const Tridiagonal& q) {
    // Clamped generators can be defective (repeated eigenvalues with too few
    // eigenvectors), in which case the eigenvector basis is numerically
    // singular. Verify the reconstruction; on failure split the spectrum with
    // a tiny growing diagonal jitter and transfer the exact eigenvalue shift
    // back out.
    const Eigen::MatrixXd a = q.dense();
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    double jitter = 0.0;
    for (int attempt = 0; attempt < 4; ++attempt) {
        Eigen::MatrixXd perturbed = a;
        if (attempt > 0) {
            jitter = scale * std::pow(10.0, -12 + 2 * attempt); // 1e-10, 1e-8, 1e-6
            for (int i = 0; i < q.m; ++i) perturbed(i, i) += jitter * i;
        }
        SpectralDecomp d = eig_general_once(perturbed);
        const Eigen::MatrixXd recon = d.V * d.eigenvalues.asDiagonal() * d.U.transpose();
        if ((recon - perturbed).cwiseAbs().maxCoeff() <= 1e-9 * scale) return d;
    }
    throw NumericalError("eig: defective generator, fallback decomposition unreliable");
}

} // namespace

SpectralDecomp eig(const Tridiagonal& q) {
    const int m = q.m;
    if (m < 2) throw ConfigError("eig: dimension must be >= 2");

    bool symmetrizable = true;
    for (int i = 0; i + 1 < m; ++i) {
        if (!(q.sub[i] * q.super[i] > 0.0)) {
            symmetrizable = false;
            break;
        }
    }
    if (!symmetrizable) return eig_general(q);

    // D Q D^{-1} is symmetric tridiagonal with off-diagonal sqrt(sub*super),
    // where D = diag(exp(w)) and w accumulates half log-ratios.
    Eigen::VectorXd w(m), off(m - 1);
    w[0] = 0.0;
    for (int i = 0; i + 1 < m; ++i) {
        w[i + 1] = w[i] + 0.5 * (std::log(q.super[i]) - std::log(q.sub[i]));
        off[i] = std::sqrt(q.super[i] * q.sub[i]);
    }
    w.array() -= w.mean();
    if (w.maxCoeff() - w.minCoeff() > kMaxLogScale) return eig_general(q);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(q.diag, off);
    if (solver.info() != Eigen::Success)
        throw NumericalError("eig: symmetric tridiagonal solver failed to converge");

    SpectralDecomp d;
    d.eigenvalues.resize(m);
    d.V.resize(m, m);
    d.U.resize(m, m);
    const Eigen::VectorXd scale = w.array().exp();
    // Eigen returns ascending eigenvalues; store descending.
    for (int j = 0; j < m; ++j) {
        const int src = m - 1 - j;
        d.eigenvalues[j] = solver.eigenvalues()[src];
        d.V.col(j) = solver.eigenvectors().col(src).cwiseQuotient(scale);
        d.U.col(j) = solver.eigenvectors().col(src).cwiseProduct(scale);
    }
    d.min_gap = m > 1 ? (d.eigenvalues.head(m - 1) - d.eigenvalues.tail(m - 1)).minCoeff() : 0.0;
    return d;
}

Eigen::MatrixXd transition_matrix(const SpectralDecomp& d, double delta) {
    if (delta <= 0.0) throw ConfigError("transition_matrix: delta must be > 0");
    const Eigen::VectorXd ed = (delta * d.eigenvalues.array()).exp();
    Eigen::MatrixXd t = (d.V * ed.asDiagonal()) * d.U.transpose();

    if (t.minCoeff() < -1e-6)
        throw NumericalError("transition_matrix: negative probability beyond tolerance "
                             "(ill-conditioned decomposition)");
    t = t.cwiseMax(0.0).cwiseMin(1.0);
    const Eigen::VectorXd row_sums = t.rowwise().sum();
    for (int i = 0; i < t.rows(); ++i) {
        if (row_sums[i] > 0.0) t.row(i) /= row_sums[i];
    }
    return t;
}

Eigen::MatrixXd expm_transition(const Tridiagonal& q, double delta) {
    Eigen::MatrixXd t = (q.dense() * delta).exp();
    t = t.cwiseMax(0.0).cwiseMin(1.0);
    const Eigen::VectorXd row_sums = t.rowwise().sum();
    for (int i = 0; i < t.rows(); ++i) {
        if (row_sums[i] > 0.0) t.row(i) /= row_sums[i];
    }
    return t;
}

Eigen::MatrixXd x_matrix(const Eigen::VectorXd& eigenvalues, double delta) {
    if (delta <= 0.0) throw ConfigError("x_matrix: delta must be > 0");
    const int m = static_cast<int>(eigenvalues.size());
    Eigen::VectorXd ed = (delta * eigenvalues.array()).exp();
    Eigen::MatrixXd x(m, m);
    for (int i = 0; i < m; ++i) {
        x(i, i) = delta * ed[i];
        for (int j = 0; j < i; ++j) {
            const double li = eigenvalues[i], lj = eigenvalues[j];
            const double tol = 1e-9 * std::max({std::abs(li), std::abs(lj), 1.0});
            double v;
            if (std::abs(li - lj) < tol) {
                v = delta * std::exp(0.5 * delta * (li + lj));
            } else {
                v = (ed[i] - ed[j]) / (li - lj);
            }
            x(i, j) = v;
            x(j, i) = v;
        }
    }
    return x;
}

Eigen::MatrixXd transition_partial(const SpectralDecomp& d, const Eigen::MatrixXd& x,
                                   const Tridiagonal& dq) {
    const int m = d.m();
    // dQ * V in O(m^2) using the tridiagonal bands.
    Eigen::MatrixXd qv = dq.diag.asDiagonal() * d.V;
    qv.topRows(m - 1) += dq.super.asDiagonal() * d.V.bottomRows(m - 1);
    qv.bottomRows(m - 1) += dq.sub.asDiagonal() * d.V.topRows(m - 1);

    Eigen::MatrixXd inner = (d.U.transpose() * qv).cwiseProduct(x);
    return (d.V * inner) * d.U.transpose();
}

} // namespace ctmle
