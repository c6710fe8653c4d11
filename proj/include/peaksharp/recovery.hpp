#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <optional>
#include <string>
#include <vector>

#include "peaksharp/errors.hpp"
#include "peaksharp/metrics.hpp"
#include "peaksharp/nnls.hpp"
#include "peaksharp/parallel.hpp"
#include "peaksharp/signal.hpp"
#include "peaksharp/vca.hpp"

namespace peaksharp {

enum class RecoveryMode {
    Auto,  // NNLS when m >= n, l1 otherwise
    Nnls,
    L1,
    Pinv,  // diagnostic only: pseudoinverse, output may go negative
};

/// Recover the source rows S from X and a mixing estimate by per-column
/// solves. Pass the ORIGINAL (unsharpened) mixtures: sharpening feeds only the
/// estimation of A, while recovery should return the physical spectra.
/// mu <= 0 picks the per-column default 1e-6 * ||A^T x||_inf for the l1 path.
inline std::vector<Spectrum> recover_sources(const DataMatrix& X, const MixingMatrix& A,
                                             RecoveryMode mode = RecoveryMode::Auto,
                                             double mu = 0.0) {
    if (A.columns.rows() != X.values.rows())
        throw data_error("recover_sources: mixing matrix row count does not match mixtures");
    const Eigen::Index m = A.columns.rows();
    const Eigen::Index n = A.columns.cols();
    const Eigen::Index p = X.values.cols();
    if (p < 1) throw data_error("recover_sources: no data columns");

    RecoveryMode effective = mode;
    if (mode == RecoveryMode::Auto)
        effective = (m >= n) ? RecoveryMode::Nnls : RecoveryMode::L1;

    Eigen::JacobiSVD<Eigen::MatrixXd> svd;
    if (effective == RecoveryMode::Nnls || effective == RecoveryMode::Pinv) {
        svd.compute(A.columns, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const double smax = svd.singularValues().maxCoeff();
        const double smin = svd.singularValues().minCoeff();
        if (effective == RecoveryMode::Nnls && !(smin > 1e-8 * smax))
            throw numerical_error("recover_sources: mixing matrix is rank deficient");
    }

    Eigen::MatrixXd S(n, p);
    std::vector<std::string> failures(static_cast<std::size_t>(p));
    detail::parallel_for(static_cast<std::size_t>(p), [&](std::size_t jj) {
        const Eigen::Index j = static_cast<Eigen::Index>(jj);
        const Eigen::VectorXd x = X.values.col(j);
        try {
            switch (effective) {
                case RecoveryMode::Nnls: {
                    S.col(j) = nnls_solve(A.columns, x).x;
                    break;
                }
                case RecoveryMode::L1: {
                    double col_mu = mu;
                    if (!(col_mu > 0.0)) {
                        const double scale = (A.columns.transpose() * x).cwiseAbs().maxCoeff();
                        col_mu = std::max(1e-6 * scale, 1e-300);
                    }
                    S.col(j) = l1_solve(A.columns, x, col_mu);
                    break;
                }
                case RecoveryMode::Pinv: {
                    S.col(j) = svd.solve(x);
                    break;
                }
                default:
                    break;
            }
        } catch (const error& e) {
            failures[jj] = e.what();
        }
    });
    for (std::size_t jj = 0; jj < failures.size(); ++jj)
        if (!failures[jj].empty())
            throw numerical_error("recover_sources: column " + std::to_string(jj) + ": " +
                                  failures[jj]);

    std::vector<Spectrum> out;
    out.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        Spectrum s{std::vector<double>(static_cast<std::size_t>(p)), X.dx, X.origin};
        for (Eigen::Index j = 0; j < p; ++j) s.values[static_cast<std::size_t>(j)] = S(i, j);
        out.push_back(std::move(s));
    }
    return out;
}

/// Result of one full separation run.
struct SeparationReport {
    MixingMatrix estimated_mixing;
    std::vector<Spectrum> estimated_sources;
    ColumnScores scores;
    std::string method;     // "nn" or "nnp"
    double weight_k = 0.0;  // 0 under NN
    std::optional<MetricBundle> metrics;  // filled when ground truth is available
};

} // namespace peaksharp
