#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "peaksharp/errors.hpp"

namespace peaksharp {

struct NnlsSolution {
    Eigen::VectorXd x;         // minimizer, elementwise >= 0
    double residual_norm = 0;  // ||A x - b||_2
    int iterations = 0;        // outer active-set iterations
};

/// Nonnegative least squares min 0.5 ||Ax - b||^2 s.t. x >= 0 by the
/// Lawson-Hanson active-set method: start with every coordinate active (at
/// zero), repeatedly free the coordinate with the most negative gradient,
/// solve the unconstrained problem on the free set, and step back to
/// feasibility when that solution leaves the orthant. Finite termination,
/// deterministic (gradient ties break toward the lowest index).
///
/// `tol` is relative: gradients are compared against tol * ||A^T b||_inf.
inline NnlsSolution nnls_solve(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                               double tol = 1e-10) {
    const Eigen::Index m = A.rows();
    const Eigen::Index n = A.cols();
    if (m < 1 || n < 1) throw data_error("nnls_solve: empty system");
    if (b.size() != m) throw data_error("nnls_solve: dimension mismatch between A and b");
    if (!(tol > 0.0)) throw config_error("nnls_solve: tolerance must be positive");

    NnlsSolution sol;
    sol.x = Eigen::VectorXd::Zero(n);

    const Eigen::VectorXd Atb = A.transpose() * b;
    const double scale = Atb.cwiseAbs().maxCoeff();
    if (scale == 0.0) {  // b orthogonal to range(A) or zero: x = 0 is optimal
        sol.residual_norm = b.norm();
        return sol;
    }
    const double grad_tol = tol * scale;
    const int max_outer = std::max<int>(10, 10 * static_cast<int>(n));

    std::vector<bool> free_set(static_cast<std::size_t>(n), false);
    std::vector<Eigen::Index> free_idx;
    Eigen::VectorXd residual = b;

    int outer = 0;
    for (;;) {
        // w = A^T (b - A x): positive entries mark descent directions.
        const Eigen::VectorXd w = A.transpose() * residual;
        Eigen::Index pick = -1;
        double best = grad_tol;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (free_set[static_cast<std::size_t>(j)]) continue;
            if (w[j] > best) {  // strict: ties keep the lowest index
                best = w[j];
                pick = j;
            }
        }
        if (pick < 0) break;  // KKT satisfied
        if (outer >= max_outer)
            throw numerical_error("nnls_solve: no convergence in " + std::to_string(max_outer) +
                                  " active-set iterations");
        ++outer;
        free_set[static_cast<std::size_t>(pick)] = true;

        for (;;) {
            free_idx.clear();
            for (Eigen::Index j = 0; j < n; ++j)
                if (free_set[static_cast<std::size_t>(j)]) free_idx.push_back(j);
            if (free_idx.empty()) break;

            Eigen::MatrixXd Af(m, static_cast<Eigen::Index>(free_idx.size()));
            for (std::size_t c = 0; c < free_idx.size(); ++c) Af.col(static_cast<Eigen::Index>(c)) = A.col(free_idx[c]);
            const Eigen::VectorXd z = Af.colPivHouseholderQr().solve(b);

            bool interior = true;
            for (Eigen::Index c = 0; c < z.size(); ++c)
                if (!(z[c] > 0.0)) { interior = false; break; }
            if (interior) {
                sol.x.setZero();
                for (std::size_t c = 0; c < free_idx.size(); ++c)
                    sol.x[free_idx[c]] = z[static_cast<Eigen::Index>(c)];
                break;
            }

            // Move toward z until the first free coordinate hits zero.
            double alpha = std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < free_idx.size(); ++c) {
                const double zc = z[static_cast<Eigen::Index>(c)];
                if (zc <= 0.0) {
                    const double xc = sol.x[free_idx[c]];
                    alpha = std::min(alpha, xc / (xc - zc));
                }
            }
            for (std::size_t c = 0; c < free_idx.size(); ++c) {
                const Eigen::Index j = free_idx[c];
                sol.x[j] += alpha * (z[static_cast<Eigen::Index>(c)] - sol.x[j]);
            }
            for (std::size_t c = 0; c < free_idx.size(); ++c) {
                const Eigen::Index j = free_idx[c];
                const double zc = z[static_cast<Eigen::Index>(c)];
                if (zc <= 0.0 && sol.x[j] <= alpha * 1e-14 + 0.0) sol.x[j] = 0.0;
                if (sol.x[j] <= 0.0) {
                    sol.x[j] = 0.0;
                    free_set[static_cast<std::size_t>(j)] = false;
                }
            }
        }
        residual = b - A * sol.x;
    }

    sol.residual_norm = residual.norm();
    sol.iterations = outer;
    return sol;
}

/// Largest squared singular value of A via power iteration on A^T A.
inline double operator_norm_squared(const Eigen::MatrixXd& A, int iters = 200) {
    const Eigen::Index n = A.cols();
    Eigen::VectorXd v = Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
    double lambda = 0.0;
    for (int i = 0; i < iters; ++i) {
        Eigen::VectorXd w = A.transpose() * (A * v);
        const double norm = w.norm();
        if (norm == 0.0) return 0.0;
        const double next = norm;
        v = w / norm;
        if (std::abs(next - lambda) <= 1e-14 * next) { lambda = next; break; }
        lambda = next;
    }
    return lambda;
}

/// Sparse nonnegative recovery: approximate minimizer of
///     0.5 ||Ax - b||^2 + mu ||x||_1   over x >= 0
/// by proximal-gradient iteration with step 1/||A||_2^2 (power-method
/// estimate): x <- max(x + d A^T (b - Ax) - d mu, 0). The step choice makes
/// the objective non-increasing; iteration stops when the sup-norm change of
/// the iterate falls below `tol` (relative to the iterate scale).
inline Eigen::VectorXd l1_solve(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, double mu,
                                int max_iter = 200000, double tol = 1e-12) {
    if (!(mu > 0.0)) throw config_error("l1_solve: mu must be positive");
    if (b.size() != A.rows()) throw data_error("l1_solve: dimension mismatch between A and b");
    const Eigen::Index n = A.cols();
    const double lambda = operator_norm_squared(A);
    if (lambda == 0.0) throw data_error("l1_solve: A must be nonzero");
    const double step = 1.0 / lambda;

    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    for (int it = 0; it < max_iter; ++it) {
        Eigen::VectorXd next = x + step * (A.transpose() * (b - A * x));
        next.array() -= step * mu;
        next = next.cwiseMax(0.0);
        const double change = (next - x).cwiseAbs().maxCoeff();
        x.swap(next);
        if (change <= tol * std::max(x.cwiseAbs().maxCoeff(), 1.0)) break;
    }
    return x;
}

} // namespace peaksharp
