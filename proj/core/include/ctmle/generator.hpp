#ifndef CTMLE_GENERATOR_HPP
#define CTMLE_GENERATOR_HPP

#include <vector>

#include <Eigen/Dense>

#include "ctmle/grid.hpp"
#include "ctmle/models.hpp"

namespace ctmle {

enum class Boundary { Reflect, Absorb };

/// Tridiagonal matrix stored by bands. sub[i] = A(i+1,i), diag[i] = A(i,i),
/// super[i] = A(i,i+1).
struct Tridiagonal {
    Eigen::VectorXd sub;   // size m-1
    Eigen::VectorXd diag;  // size m
    Eigen::VectorXd super; // size m-1
    int m = 0;

    static Tridiagonal zero(int m) {
        Tridiagonal t;
        t.m = m;
        t.sub = Eigen::VectorXd::Zero(m - 1);
        t.diag = Eigen::VectorXd::Zero(m);
        t.super = Eigen::VectorXd::Zero(m - 1);
        return t;
    }

    Eigen::MatrixXd dense() const {
        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, m);
        for (int i = 0; i < m; ++i) a(i, i) = diag[i];
        for (int i = 0; i + 1 < m; ++i) {
            a(i + 1, i) = sub[i];
            a(i, i + 1) = super[i];
        }
        return a;
    }
};

/// Generator Q(theta) plus bookkeeping about clamped entries.
struct GeneratorResult {
    Tridiagonal q;
    int violations = 0; // off-diagonal entries that went negative and were clamped
    // Clamp masks used to keep parameter partials consistent with the
    // clamped generator (a clamped entry has zero partial).
    std::vector<bool> sub_clamped;
    std::vector<bool> super_clamped;
};

/// Assemble the tridiagonal rate matrix of the approximating chain.
///
/// Interior rows follow the upwind finite-difference rates built from the
/// positive/negative parts of the drift and sigma^2. Boundary rows are
/// reflecting by default (single off-diagonal rate) or zero when absorbing.
/// When the grid-step condition fails, negative off-diagonals are clamped to
/// zero and reported; strict mode turns the first violation into an error.
GeneratorResult build_generator(const DiffusionModel& model, const Eigen::VectorXd& theta,
                                const StateSpace& grid, Boundary boundary = Boundary::Reflect,
                                bool strict = false);

/// dQ/dtheta_u with the same sparsity and row-sum-zero structure. Entries
/// clamped in `gen` carry zero partials.
Tridiagonal generator_partial(const DiffusionModel& model, const Eigen::VectorXd& theta,
                              const StateSpace& grid, int u, Boundary boundary,
                              const GeneratorResult& gen);

} // namespace ctmle

#endif
