#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "peaksharp/errors.hpp"
#include "peaksharp/nnls.hpp"
#include "peaksharp/parallel.hpp"
#include "peaksharp/signal.hpp"

namespace peaksharp {

/// Mixture data X (m rows of spectra, p columns of points in m-space) with the
/// acquisition-axis metadata carried through the pipeline.
struct DataMatrix {
    Eigen::MatrixXd values;  // m x p, nonnegative
    double dx = 1.0;
    double origin = 0.0;

    Eigen::Index mixtures() const { return values.rows(); }
    Eigen::Index samples() const { return values.cols(); }

    void validate() const {
        if (values.rows() < 2) throw data_error("DataMatrix: need at least 2 mixtures");
        if (values.cols() <= values.rows())
            throw data_error("DataMatrix: need more samples than mixtures");
        if ((values.array() < 0.0).any())
            throw data_error("DataMatrix: entries must be nonnegative");
    }

    Spectrum row(Eigen::Index i) const {
        Spectrum s{std::vector<double>(static_cast<std::size_t>(values.cols())), dx, origin};
        for (Eigen::Index j = 0; j < values.cols(); ++j)
            s.values[static_cast<std::size_t>(j)] = values(i, j);
        return s;
    }
};

/// Build a DataMatrix from spectra rows (all must share grid metadata).
inline DataMatrix rows_to_matrix(const std::vector<Spectrum>& rows) {
    if (rows.empty()) throw data_error("rows_to_matrix: no rows");
    const std::size_t p = rows.front().size();
    DataMatrix X;
    X.dx = rows.front().dx;
    X.origin = rows.front().origin;
    X.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(p));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != p) throw data_error("rows_to_matrix: row lengths differ");
        for (std::size_t j = 0; j < p; ++j)
            X.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i].values[j];
    }
    return X;
}

/// Apply the sharpening operator to every row of X.
inline DataMatrix sharpen_rows(const DataMatrix& X, double k, bool clamp_negative = true) {
    if (k < 0.0) throw config_error("sharpen_rows: weight k must be nonnegative");
    DataMatrix out = X;
    const std::size_t m = static_cast<std::size_t>(X.values.rows());
    detail::parallel_for(m, [&](std::size_t i) {
        const Spectrum sharp = sharpen(X.row(static_cast<Eigen::Index>(i)), k, clamp_negative);
        for (Eigen::Index j = 0; j < out.values.cols(); ++j)
            out.values(static_cast<Eigen::Index>(i), j) = sharp.values[static_cast<std::size_t>(j)];
    });
    return out;
}

/// Columns surviving the norm filter, scaled to unit l1 sum (points on the
/// standard simplex slice of the cone).
struct NormalizedColumns {
    Eigen::MatrixXd cols;                // m x kept
    std::vector<Eigen::Index> kept;      // original column indices, increasing
    double dx = 1.0;
    double origin = 0.0;
};

/// Vertex-likelihood scores for the kept columns (aligned with
/// `kept_indices`), each the optimal value of the nonnegative representation
/// residual 0.5 || sum_j X^j lambda_j - X^k ||^2.
struct ColumnScores {
    std::vector<Eigen::Index> kept_indices;
    std::vector<double> scores;
};

/// Estimated mixing matrix: unit-l1 columns plus the data columns they came from.
struct MixingMatrix {
    Eigen::MatrixXd columns;                  // m x n
    std::vector<Eigen::Index> column_indices; // provenance; empty for ground truth

    Eigen::Index mixtures() const { return columns.rows(); }
    Eigen::Index sources() const { return columns.cols(); }
};

inline Eigen::MatrixXd l1_normalize_columns(Eigen::MatrixXd M) {
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
        const double norm = M.col(j).cwiseAbs().sum();
        if (norm > 0.0) M.col(j) /= norm;
    }
    return M;
}

/// Drop columns whose l1 norm is at most drop_tol times the largest column
/// norm, scale the rest to unit l1 sum.
inline NormalizedColumns normalize_columns(const DataMatrix& X, double drop_tol = 1e-6) {
    X.validate();
    if (drop_tol < 0.0) throw config_error("normalize_columns: drop_tol must be nonnegative");
    const Eigen::Index p = X.samples();
    Eigen::VectorXd norms(p);
    for (Eigen::Index j = 0; j < p; ++j) norms[j] = X.values.col(j).sum();  // entries >= 0
    const double max_norm = norms.maxCoeff();
    const double cutoff = drop_tol * max_norm;

    NormalizedColumns out;
    out.dx = X.dx;
    out.origin = X.origin;
    for (Eigen::Index j = 0; j < p; ++j)
        if (norms[j] > cutoff) out.kept.push_back(j);
    if (out.kept.empty()) throw data_error("normalize_columns: every column dropped");
    out.cols.resize(X.mixtures(), static_cast<Eigen::Index>(out.kept.size()));
    for (std::size_t c = 0; c < out.kept.size(); ++c)
        out.cols.col(static_cast<Eigen::Index>(c)) = X.values.col(out.kept[c]) / norms[out.kept[c]];
    return out;
}

namespace detail {
// Cosine threshold above which two columns count as the same direction for
// scoring purposes. exclude_angle_deg = 0 keeps only the numerical-duplicate
// exclusion; exact collinear twins would otherwise mask each other and score 0.
inline double collinear_cos_threshold(double exclude_angle_deg) {
    constexpr double duplicate_cos = 1.0 - 1e-10;
    if (exclude_angle_deg <= 0.0) return duplicate_cos;
    const double c = std::cos(exclude_angle_deg * 3.14159265358979323846 / 180.0);
    return std::min(c, duplicate_cos);
}
} // namespace detail

/// Score every kept column by how badly the other kept columns fail to
/// represent it as a nonnegative combination (residual of the NNLS fit).
/// Interior columns of the cone score ~0; vertex columns score high. Columns
/// collinear with the scored one (cosine above the exclusion threshold) are
/// left out of the representation basis so that duplicated vertex directions
/// cannot explain each other; `exclude_angle_deg` widens that exclusion, which
/// buys noise robustness at the cost of angular resolution.
inline ColumnScores score_columns(const NormalizedColumns& Xn, double exclude_angle_deg = 0.0,
                                  double nnls_tol = 1e-10) {
    const Eigen::Index kept_n = Xn.cols.cols();
    if (kept_n < 3) throw data_error("score_columns: need at least 3 kept columns");
    const double cos_thr = detail::collinear_cos_threshold(exclude_angle_deg);

    Eigen::MatrixXd unit = Xn.cols;
    for (Eigen::Index j = 0; j < kept_n; ++j) {
        const double norm = unit.col(j).norm();
        if (norm > 0.0) unit.col(j) /= norm;
    }

    ColumnScores out;
    out.kept_indices = Xn.kept;
    out.scores.assign(static_cast<std::size_t>(kept_n), 0.0);
    std::vector<std::string> failures(static_cast<std::size_t>(kept_n));

    detail::parallel_for(static_cast<std::size_t>(kept_n), [&](std::size_t kk) {
        const Eigen::Index k = static_cast<Eigen::Index>(kk);
        const Eigen::VectorXd cos_k = unit.transpose() * unit.col(k);
        std::vector<Eigen::Index> basis;
        basis.reserve(static_cast<std::size_t>(kept_n) - 1);
        for (Eigen::Index j = 0; j < kept_n; ++j)
            if (j != k && cos_k[j] < cos_thr) basis.push_back(j);
        if (basis.empty()) {
            out.scores[kk] = 0.5 * Xn.cols.col(k).squaredNorm();
            return;
        }
        Eigen::MatrixXd B(Xn.cols.rows(), static_cast<Eigen::Index>(basis.size()));
        for (std::size_t c = 0; c < basis.size(); ++c)
            B.col(static_cast<Eigen::Index>(c)) = Xn.cols.col(basis[c]);
        try {
            const NnlsSolution fit = nnls_solve(B, Xn.cols.col(k), nnls_tol);
            out.scores[kk] = 0.5 * fit.residual_norm * fit.residual_norm;
        } catch (const numerical_error& e) {
            failures[kk] = e.what();
        }
    });
    for (std::size_t kk = 0; kk < failures.size(); ++kk)
        if (!failures[kk].empty())
            throw numerical_error("score_columns: column " + std::to_string(Xn.kept[kk]) + ": " +
                                  failures[kk]);
    return out;
}

/// Pick the n highest-scoring columns as the mixing-matrix estimate, skipping
/// any candidate closer than min_angle_deg to an already selected one (ties in
/// score break toward the lower column index).
inline MixingMatrix select_vertices(const NormalizedColumns& Xn, const ColumnScores& scores,
                                    int n, double min_angle_deg = 2.0) {
    if (n < 2) throw config_error("select_vertices: need at least 2 sources");
    const Eigen::Index kept_n = Xn.cols.cols();
    if (scores.scores.size() != static_cast<std::size_t>(kept_n))
        throw data_error("select_vertices: scores do not match kept columns");
    if (kept_n < n)
        throw data_error("select_vertices: only " + std::to_string(kept_n) +
                         " candidate columns for " + std::to_string(n) + " sources");

    std::vector<std::size_t> order(static_cast<std::size_t>(kept_n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores.scores[a] != scores.scores[b]) return scores.scores[a] > scores.scores[b];
        return Xn.kept[a] < Xn.kept[b];
    });

    const double min_cos = std::cos(min_angle_deg * 3.14159265358979323846 / 180.0);
    std::vector<std::size_t> chosen;
    for (std::size_t cand : order) {
        const Eigen::VectorXd u = Xn.cols.col(static_cast<Eigen::Index>(cand)).normalized();
        bool separated = true;
        for (std::size_t c : chosen) {
            const Eigen::VectorXd v = Xn.cols.col(static_cast<Eigen::Index>(c)).normalized();
            if (u.dot(v) >= min_cos) { separated = false; break; }
        }
        if (!separated) continue;
        chosen.push_back(cand);
        if (chosen.size() == static_cast<std::size_t>(n)) break;
    }
    if (chosen.size() < static_cast<std::size_t>(n))
        throw data_error("select_vertices: found only " + std::to_string(chosen.size()) + " of " +
                         std::to_string(n) + " vertices separated by " +
                         std::to_string(min_angle_deg) + " deg");

    MixingMatrix A;
    A.columns.resize(Xn.cols.rows(), n);
    for (int c = 0; c < n; ++c) {
        A.columns.col(c) = Xn.cols.col(static_cast<Eigen::Index>(chosen[static_cast<std::size_t>(c)]));
        A.column_indices.push_back(Xn.kept[chosen[static_cast<std::size_t>(c)]]);
    }
    A.columns = l1_normalize_columns(A.columns);

    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(A.columns);
    const double smin = svd.singularValues().minCoeff();
    const double smax = svd.singularValues().maxCoeff();
    if (!(smin > 1e-8 * smax))
        throw numerical_error("select_vertices: selected columns are linearly dependent");
    return A;
}

struct EstimateOptions {
    double drop_tol = 1e-6;          // column norm filter, relative to the largest
    double min_angle_deg = 2.0;      // vertex separation at selection
    double exclude_angle_deg = 0.0;  // scoring-basis exclusion (0 = duplicates only)
    double sharpen_k = 0.0;          // 0 = NN; > 0 sharpens rows first (NNP)
    bool clamp_sharpened = true;
    double nnls_tol = 1e-10;
};

struct EstimateResult {
    MixingMatrix mixing;
    ColumnScores scores;
};

/// Full mixing-matrix estimator: (optional row sharpening) -> column norm
/// filter + l1 normalization -> NNLS residual scores -> top-score vertex
/// selection.
inline EstimateResult estimate_mixing(const DataMatrix& X, int n,
                                      const EstimateOptions& opts = {}) {
    if (n < 2) throw config_error("estimate_mixing: need at least 2 sources");
    const DataMatrix* work = &X;
    DataMatrix sharpened_data;
    if (opts.sharpen_k > 0.0) {
        sharpened_data = sharpen_rows(X, opts.sharpen_k, opts.clamp_sharpened);
        work = &sharpened_data;
    }
    const NormalizedColumns Xn = normalize_columns(*work, opts.drop_tol);
    ColumnScores scores = score_columns(Xn, opts.exclude_angle_deg, opts.nnls_tol);
    MixingMatrix A = select_vertices(Xn, scores, n, opts.min_angle_deg);
    return EstimateResult{std::move(A), std::move(scores)};
}

} // namespace peaksharp
