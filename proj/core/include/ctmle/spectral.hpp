#ifndef CTMLE_SPECTRAL_HPP
#define CTMLE_SPECTRAL_HPP

#include <Eigen/Dense>

#include "ctmle/generator.hpp"

namespace ctmle {

/// Eigendecomposition Q = V Lambda U^T with U^T V = I. Eigenvalues are real,
/// non-positive and strictly decreasing (lambda[0] >= lambda[1] >= ...).
struct SpectralDecomp {
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXd V; // right eigenvectors (columns)
    Eigen::MatrixXd U; // left eigenvectors (columns), U^T = V^{-1}
    double min_gap = 0.0;
    bool used_fallback = false; // general-purpose solver instead of symmetrization

    int m() const { return static_cast<int>(eigenvalues.size()); }
};

/// Eigendecomposition of a generator-like tridiagonal matrix. When all
/// off-diagonal products are positive the matrix is similar, via a positive
/// diagonal scaling, to a symmetric tridiagonal matrix; the symmetric problem
/// is solved and transformed back. Zero products (absorbing or clamped rows)
/// fall back to a general dense solver.
SpectralDecomp eig(const Tridiagonal& q);

/// T(delta) = V exp(Lambda delta) U^T, clamped to [0,1] and row-renormalized.
/// Pre-clamp entries below -1e-6 signal an ill-conditioned decomposition and
/// raise NumericalError; callers may retry with expm_transition.
Eigen::MatrixXd transition_matrix(const SpectralDecomp& d, double delta);

/// Scaling-and-squaring matrix exponential of Q*delta (fallback path).
Eigen::MatrixXd expm_transition(const Tridiagonal& q, double delta);

/// Divided-difference matrix X(Lambda, delta):
///   X_ii = delta * exp(delta lambda_i),
///   X_ij = (exp(delta lambda_i) - exp(delta lambda_j)) / (lambda_i - lambda_j).
/// Near-equal eigenvalues use the midpoint expansion delta*exp(delta*(li+lj)/2).
Eigen::MatrixXd x_matrix(const Eigen::VectorXd& eigenvalues, double delta);

/// dT/dtheta_u = V ((U^T dQ V) o X) U^T for a generator partial dQ.
Eigen::MatrixXd transition_partial(const SpectralDecomp& d, const Eigen::MatrixXd& x,
                                   const Tridiagonal& dq);

} // namespace ctmle

#endif
