#ifndef CTMLE_LIKELIHOOD_HPP
#define CTMLE_LIKELIHOOD_HPP

#include <vector>

#include <Eigen/Dense>

#include "ctmle/generator.hpp"
#include "ctmle/grid.hpp"
#include "ctmle/models.hpp"
#include "ctmle/spectral.hpp"

namespace ctmle {

/// Probability floor applied to transition-matrix entries before logs and
/// divisions; clamped entries can be exactly zero while a count lands there.
constexpr double kProbFloor = 1e-14;

/// Sparse count matrix C(delta): sufficient statistic of the binned sample.
struct TransitionCounts {
    struct Entry {
        int i, j;
        long count;
    };
    std::vector<Entry> entries; // sorted by (i, j), counts > 0
    Eigen::VectorXd row_totals; // C_i = sum_j C_ij, size m
    int m = 0;
    int bandwidth = 0; // B = max |i - j| over nonzero entries
    long total = 0;    // N - 1
};

/// One pass over the binned indices, O(N).
TransitionCounts count_matrix(const BinnedSample& binned, int m);

/// Fisher-information style Hessian approximation
///   H_uv = -sum_{i,j} (C_i / T_ij) dT_u(i,j) dT_v(i,j)
/// restricted to rows with C_i > 0 and columns within bandwidth + margin.
Eigen::MatrixXd fisher_hessian(const Eigen::VectorXd& row_totals, const Eigen::MatrixXd& t,
                               const std::vector<Eigen::MatrixXd>& dt, int bandwidth, int margin,
                               double floor = kProbFloor);

/// Caches the spectral decomposition and transition matrix for the most
/// recent theta. Confined to a single optimization run (single writer);
/// distinct workspaces may run concurrently.
class LikelihoodWorkspace {
public:
    LikelihoodWorkspace(DiffusionModel model, StateSpace grid, TransitionCounts counts,
                        double delta, Boundary boundary = Boundary::Reflect, bool strict = false);

    double log_likelihood(const Eigen::VectorXd& theta);
    Eigen::VectorXd gradient(const Eigen::VectorXd& theta);
    Eigen::MatrixXd approx_hessian(const Eigen::VectorXd& theta);

    /// Transition matrix at theta (floored/clamped as used by the likelihood).
    const Eigen::MatrixXd& transition(const Eigen::VectorXd& theta);
    const SpectralDecomp& decomposition(const Eigen::VectorXd& theta);
    Eigen::MatrixXd transition_theta_partial(const Eigen::VectorXd& theta, int u);

    const DiffusionModel& model() const { return model_; }
    const StateSpace& grid() const { return grid_; }
    const TransitionCounts& counts() const { return counts_; }
    double delta() const { return delta_; }

    // Diagnostics accumulated since construction.
    long clamp_violations() const { return clamp_violations_; }
    long eig_fallbacks() const { return eig_fallbacks_; }
    long expm_retries() const { return expm_retries_; }

    static constexpr int kHessianMargin = 5; // columns beyond the count bandwidth

private:
    void ensure(const Eigen::VectorXd& theta);
    const Eigen::MatrixXd& x_cache();

    DiffusionModel model_;
    StateSpace grid_;
    TransitionCounts counts_;
    double delta_;
    Boundary boundary_;
    bool strict_;

    Eigen::VectorXd cached_theta_;
    GeneratorResult gen_;
    SpectralDecomp decomp_;
    Eigen::MatrixXd t_;
    Eigen::MatrixXd x_;
    bool has_x_ = false;
    bool decomp_valid_ = false;

    long clamp_violations_ = 0;
    long eig_fallbacks_ = 0;
    long expm_retries_ = 0;
};

} // namespace ctmle

#endif
