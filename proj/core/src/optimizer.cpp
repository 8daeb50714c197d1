#include "ctmle/optimizer.hpp"

#include <cmath>
#include <limits>

namespace ctmle {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double safe_eval(const ObjectiveFn& f, const Eigen::VectorXd& x) {
    try {
        const double v = f(x);
        return std::isfinite(v) ? v : kNegInf;
    } catch (...) {
        return kNegInf;
    }
}

Eigen::VectorXd project(const Eigen::VectorXd& x, const ParamVector& box) {
    return x.cwiseMax(box.lower).cwiseMin(box.upper);
}

// Zero out gradient components pointing outside the box at active bounds.
Eigen::VectorXd projected_gradient(const Eigen::VectorXd& g, const Eigen::VectorXd& x,
                                   const ParamVector& box) {
    Eigen::VectorXd pg = g;
    for (int i = 0; i < g.size(); ++i) {
        const double span = box.upper[i] - box.lower[i];
        const double edge = 1e-12 * (1.0 + std::abs(span));
        if (x[i] <= box.lower[i] + edge && g[i] < 0.0) pg[i] = 0.0;
        if (x[i] >= box.upper[i] - edge && g[i] > 0.0) pg[i] = 0.0;
    }
    return pg;
}

} // namespace

Eigen::VectorXd fd_gradient(const ObjectiveFn& f, const Eigen::VectorXd& x,
                            const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                            double rel_step) {
    Eigen::VectorXd g(x.size());
    for (int i = 0; i < x.size(); ++i) {
        const double h = rel_step * (1.0 + std::abs(x[i]));
        Eigen::VectorXd xp = x, xm = x;
        xp[i] = std::min(x[i] + h, upper[i]);
        xm[i] = std::max(x[i] - h, lower[i]);
        const double width = xp[i] - xm[i];
        if (width <= 0.0) {
            g[i] = 0.0;
            continue;
        }
        g[i] = (f(xp) - f(xm)) / width;
    }
    return g;
}

OptimResult maximize_box(const ObjectiveFn& f, const GradientFn& grad_in, const HessianFn& hess,
                         const ParamVector& start, const OptimOptions& opt) {
    const int d = start.dim();
    const ParamVector& box = start;

    GradientFn grad = grad_in;
    if (!grad) {
        auto lower = box.lower;
        auto upper = box.upper;
        const double h = opt.fd_rel_step;
        grad = [f, lower, upper, h](const Eigen::VectorXd& x) {
            return fd_gradient(f, x, lower, upper, h);
        };
    }

    OptimResult res;
    res.x = project(start.values, box);
    res.f = safe_eval(f, res.x);

    Eigen::MatrixXd bfgs_hinv = Eigen::MatrixXd::Identity(d, d);
    Eigen::VectorXd g = grad(res.x);
    bool have_g = true;

    for (int iter = 0; iter < opt.max_iterations; ++iter) {
        res.iterations = iter + 1;
        if (!have_g) g = grad(res.x);
        have_g = false;

        const Eigen::VectorXd pg = projected_gradient(g, res.x, box);
        res.grad_norm = pg.lpNorm<Eigen::Infinity>();
        if (res.grad_norm <= opt.grad_tol_rel * (1.0 + std::abs(res.f)) + opt.grad_tol_abs) {
            res.converged = true;
            return res;
        }

        // Ascent direction.
        Eigen::VectorXd p;
        if (hess) {
            // Solve (-H + tau I) p = g with a growing Levenberg shift until
            // the direction is a usable ascent direction.
            const Eigen::MatrixXd a0 = -hess(res.x);
            const double scale = std::max(a0.diagonal().cwiseAbs().maxCoeff(), 1e-8);
            double tau = 0.0;
            for (int attempt = 0; attempt < 12; ++attempt) {
                Eigen::MatrixXd a = a0;
                a.diagonal().array() += tau;
                Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
                bool ok = ldlt.info() == Eigen::Success && ldlt.isPositive();
                if (ok) {
                    p = ldlt.solve(g);
                    ok = p.allFinite() && p.dot(g) > 1e-14 * p.norm() * g.norm();
                }
                if (ok) break;
                p.resize(0);
                tau = (tau == 0.0) ? 1e-6 * scale : 10.0 * tau;
            }
            if (p.size() == 0) p = pg / std::max(pg.norm(), 1e-300); // gradient fallback
        } else {
            p = bfgs_hinv * g;
            if (!p.allFinite() || p.dot(g) <= 0.0) {
                bfgs_hinv = Eigen::MatrixXd::Identity(d, d);
                p = g;
            }
        }

        // Backtracking: halve until the objective increases.
        double alpha = 1.0;
        Eigen::VectorXd x_new;
        double f_new = kNegInf;
        bool improved = false;
        for (int bt = 0; bt <= opt.max_backtracks; ++bt) {
            x_new = project(res.x + alpha * p, box);
            if ((x_new - res.x).lpNorm<Eigen::Infinity>() > 0.0) {
                f_new = safe_eval(f, x_new);
                if (f_new > res.f) {
                    improved = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if (!improved) {
            // Last resort: small step along the projected gradient.
            const double gnorm = std::max(pg.norm(), 1e-300);
            alpha = 1.0;
            for (int bt = 0; bt <= opt.max_backtracks; ++bt) {
                x_new = project(res.x + alpha * (pg / gnorm), box);
                f_new = safe_eval(f, x_new);
                if (f_new > res.f && (x_new - res.x).lpNorm<Eigen::Infinity>() > 0.0) {
                    improved = true;
                    break;
                }
                alpha *= 0.5;
            }
        }
        if (!improved) {
            res.line_search_failed = true;
            return res;
        }

        const Eigen::VectorXd step = x_new - res.x;
        const Eigen::VectorXd g_new = grad(x_new);
        if (!hess) {
            // BFGS update of the inverse Hessian of -f.
            const Eigen::VectorXd y = -(g_new - g);
            const double sy = step.dot(y);
            if (sy > 1e-12 * step.norm() * y.norm()) {
                const Eigen::VectorXd hy = bfgs_hinv * y;
                const double yhy = y.dot(hy);
                bfgs_hinv += ((sy + yhy) / (sy * sy)) * (step * step.transpose()) -
                             (hy * step.transpose() + step * hy.transpose()) / sy;
            }
        }
        g = g_new;
        have_g = true;
        res.x = x_new;
        res.f = f_new;
        if (step.norm() <= opt.step_tol) {
            res.converged = true;
            const Eigen::VectorXd pg2 = projected_gradient(g, res.x, box);
            res.grad_norm = pg2.lpNorm<Eigen::Infinity>();
            return res;
        }
    }
    return res;
}

} // namespace ctmle
