#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "peaksharp/errors.hpp"
#include "peaksharp/signal.hpp"

namespace peaksharp {

/// Comon's index between two mixing matrices: with D = A^{-1} Abar,
///   eps = sum_i |sum_j |d_ij| - 1|^2 + sum_j |sum_i |d_ij| - 1|^2
///       + sum_i |sum_j d_ij^2 - 1|  + sum_j |sum_i d_ij^2 - 1|.
/// Zero iff Abar equals A up to column permutation and scaling. Columns of
/// both inputs are l2-normalized first (the definition requires normalized
/// columns but fixes no norm; l2 reproduces the published values). Not
/// symmetric in its arguments.
inline double comon_index(const Eigen::MatrixXd& A, const Eigen::MatrixXd& Abar) {
    const Eigen::Index n = A.rows();
    if (A.cols() != n) throw data_error("comon_index: A must be square");
    if (Abar.rows() != n || Abar.cols() != n)
        throw data_error("comon_index: dimension mismatch");

    Eigen::MatrixXd An = A, Bn = Abar;
    for (Eigen::Index j = 0; j < n; ++j) {
        const double na = An.col(j).norm();
        const double nb = Bn.col(j).norm();
        if (na == 0.0 || nb == 0.0) throw data_error("comon_index: zero column");
        An.col(j) /= na;
        Bn.col(j) /= nb;
    }

    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(An, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double smax = svd.singularValues().maxCoeff();
    const double smin = svd.singularValues().minCoeff();
    if (!(smin > 0.0) || smax / smin > 1e12)
        throw numerical_error("comon_index: A is singular or too ill-conditioned to invert");
    const Eigen::MatrixXd D = svd.solve(Bn);

    const Eigen::MatrixXd absD = D.cwiseAbs();
    const Eigen::MatrixXd sqD = D.cwiseProduct(D);
    double eps = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double row1 = absD.row(i).sum() - 1.0;
        eps += row1 * row1;
        eps += std::abs(sqD.row(i).sum() - 1.0);
    }
    for (Eigen::Index j = 0; j < n; ++j) {
        const double col1 = absD.col(j).sum() - 1.0;
        eps += col1 * col1;
        eps += std::abs(sqD.col(j).sum() - 1.0);
    }
    return eps;
}

inline double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw data_error("cosine_similarity: length mismatch");
    if (a.empty()) throw data_error("cosine_similarity: empty vectors");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) throw data_error("cosine_similarity: zero vector");
    return std::clamp(dot / std::sqrt(na * nb), -1.0, 1.0);
}

inline double cosine_similarity(const Spectrum& a, const Spectrum& b) {
    return cosine_similarity(a.values, b.values);
}

namespace detail {
inline double column_cosine(const Eigen::MatrixXd& A, Eigen::Index i, const Eigen::MatrixXd& B,
                            Eigen::Index j) {
    const double na = A.col(i).norm();
    const double nb = B.col(j).norm();
    if (na == 0.0 || nb == 0.0) throw data_error("match_columns: zero column");
    return A.col(i).dot(B.col(j)) / (na * nb);
}
} // namespace detail

/// Permutation sigma maximizing sum_i cos(Atrue^i, Ahat^{sigma(i)}).
/// Exhaustive for n <= 8, greedy beyond. BSS estimates are defined only up to
/// column permutation and scale; apply this before per-source metrics.
inline std::vector<int> match_columns(const Eigen::MatrixXd& Atrue, const Eigen::MatrixXd& Ahat) {
    if (Atrue.rows() != Ahat.rows() || Atrue.cols() != Ahat.cols())
        throw data_error("match_columns: dimension mismatch");
    const int n = static_cast<int>(Atrue.cols());
    Eigen::MatrixXd C(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            C(i, j) = detail::column_cosine(Atrue, i, Ahat, j);

    std::vector<int> best(static_cast<std::size_t>(n));
    if (n <= 8) {
        std::vector<int> perm(static_cast<std::size_t>(n));
        std::iota(perm.begin(), perm.end(), 0);
        double best_total = -std::numeric_limits<double>::infinity();
        do {
            double total = 0.0;
            for (int i = 0; i < n; ++i) total += C(i, perm[static_cast<std::size_t>(i)]);
            if (total > best_total) {
                best_total = total;
                best = perm;
            }
        } while (std::next_permutation(perm.begin(), perm.end()));
    } else {
        std::vector<bool> used(static_cast<std::size_t>(n), false);
        for (int i = 0; i < n; ++i) {
            int pick = -1;
            double top = -std::numeric_limits<double>::infinity();
            for (int j = 0; j < n; ++j)
                if (!used[static_cast<std::size_t>(j)] && C(i, j) > top) {
                    top = C(i, j);
                    pick = j;
                }
            used[static_cast<std::size_t>(pick)] = true;
            best[static_cast<std::size_t>(i)] = pick;
        }
    }
    return best;
}

/// Everything cmd_eval reports about one estimate against ground truth.
struct MetricBundle {
    double comon = 0.0;
    std::vector<int> column_assignment;       // truth column i <-> estimate column assignment[i]
    std::vector<double> mixing_cosines;       // per matched mixing column
    std::vector<double> per_source_cosine;    // per matched recovered source (empty if none given)
};

inline MetricBundle evaluate_mixing(const Eigen::MatrixXd& Atrue, const Eigen::MatrixXd& Ahat) {
    MetricBundle out;
    out.comon = comon_index(Atrue, Ahat);
    out.column_assignment = match_columns(Atrue, Ahat);
    for (int i = 0; i < static_cast<int>(Atrue.cols()); ++i)
        out.mixing_cosines.push_back(
            detail::column_cosine(Atrue, i, Ahat, out.column_assignment[static_cast<std::size_t>(i)]));
    return out;
}

} // namespace peaksharp
