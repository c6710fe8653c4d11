#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "peaksharp/errors.hpp"
#include "peaksharp/lorentzian.hpp"
#include "peaksharp/rng.hpp"
#include "peaksharp/signal.hpp"
#include "peaksharp/vca.hpp"

namespace peaksharp {

struct GridSpec {
    std::size_t samples = 0;
    double dx = 1.0;
    double origin = 0.0;

    double axis(std::size_t i) const { return origin + static_cast<double>(i) * dx; }
    double span_end() const { return axis(samples == 0 ? 0 : samples - 1); }
};

/// One synthetic source: its peaks plus (optionally) the sample interval
/// [first, second] on which it must dominate (SAP: others exactly zero there;
/// DPS: others small relative to it).
struct SourceSpec {
    std::string name;
    std::vector<LorentzPeak> peaks;
    std::optional<std::pair<std::size_t, std::size_t>> dominant_window;
};

enum class Condition { Sap, Dps };

struct ScenarioConfig {
    GridSpec grid;
    std::vector<SourceSpec> sources;
    Eigen::MatrixXd mixing;  // m x n ground truth
    Condition condition = Condition::Sap;
    double epsilon_level = 0.0;  // DPS leakage bound; must be 0 under SAP
    std::optional<double> snr_db;  // absent or +inf = noiseless
    std::uint64_t seed = 0;

    void validate() const {
        if (grid.samples < 3) throw config_error("scenario: grid needs at least 3 samples");
        if (!(grid.dx > 0.0)) throw config_error("scenario: dx must be positive");
        if (sources.empty()) throw config_error("scenario: no sources");
        if (mixing.cols() != static_cast<Eigen::Index>(sources.size()))
            throw config_error("scenario: mixing column count must equal source count");
        if (mixing.rows() < 2) throw config_error("scenario: need at least 2 mixtures");
        if ((mixing.array() < 0.0).any())
            throw config_error("scenario: mixing coefficients must be nonnegative");
        if (condition == Condition::Sap && epsilon_level != 0.0)
            throw config_error("scenario: epsilon level must be 0 under the SAP condition");
        if (condition == Condition::Dps && !(epsilon_level > 0.0))
            throw config_error("scenario: DPS condition needs a positive epsilon level");
        for (const SourceSpec& src : sources) {
            if (src.peaks.empty()) throw config_error("scenario: source without peaks");
            for (const LorentzPeak& peak : src.peaks) {
                peak.validate();
                if (peak.center < grid.origin || peak.center > grid.span_end())
                    throw config_error("scenario: peak center " + std::to_string(peak.center) +
                                       " outside the grid span");
            }
            if (src.dominant_window) {
                if (src.dominant_window->second >= grid.samples ||
                    src.dominant_window->first > src.dominant_window->second)
                    throw config_error("scenario: bad dominant window for source '" + src.name + "'");
            }
        }
    }
};

/// True when every source has a sample index where it alone is nonzero
/// (the strict non-overlap assumption the SAP construction must satisfy).
inline bool satisfies_nna(const std::vector<Spectrum>& sources) {
    if (sources.empty()) return false;
    const std::size_t p = sources.front().size();
    for (std::size_t i = 0; i < sources.size(); ++i) {
        bool found = false;
        for (std::size_t j = 0; j < p && !found; ++j) {
            if (!(sources[i].values[j] > 0.0)) continue;
            bool alone = true;
            for (std::size_t k = 0; k < sources.size(); ++k)
                if (k != i && sources[k].values[j] != 0.0) { alone = false; break; }
            found = alone;
        }
        if (!found) return false;
    }
    return true;
}

// Tail mass of a Lorentzian beyond 10 half-widths is under 1% of the peak;
// zeroing there keeps SAP windows exactly clean without visible distortion.
inline constexpr double kSapTruncateRadius = 10.0;

/// Sample the configured sources. SAP truncates every peak to
/// center +- 10 hwhm so stand-alone windows are exactly zero elsewhere; DPS
/// keeps full tails. Declared dominance windows are verified post-hoc and a
/// violation reports the offending source/window.
inline std::vector<Spectrum> synth_sources(const ScenarioConfig& cfg) {
    cfg.validate();
    const double truncate = cfg.condition == Condition::Sap ? kSapTruncateRadius : 0.0;
    std::vector<Spectrum> sources;
    sources.reserve(cfg.sources.size());
    for (const SourceSpec& src : cfg.sources)
        sources.push_back(
            sample_peaks(src.peaks, cfg.grid.samples, cfg.grid.dx, cfg.grid.origin, truncate));

    for (std::size_t i = 0; i < cfg.sources.size(); ++i) {
        const auto& window = cfg.sources[i].dominant_window;
        if (!window) continue;
        double dominant_max = 0.0;
        double other_max = 0.0;
        for (std::size_t j = window->first; j <= window->second; ++j) {
            dominant_max = std::max(dominant_max, sources[i].values[j]);
            for (std::size_t k = 0; k < sources.size(); ++k)
                if (k != i) other_max = std::max(other_max, sources[k].values[j]);
        }
        const std::string where = "window [" + std::to_string(window->first) + "," +
                                  std::to_string(window->second) + "] of source '" +
                                  cfg.sources[i].name + "'";
        if (!(dominant_max > 0.0))
            throw config_error("synth_sources: no dominant signal on " + where);
        if (cfg.condition == Condition::Sap) {
            if (other_max != 0.0)
                throw config_error("synth_sources: SAP violated on " + where);
        } else if (other_max > cfg.epsilon_level * dominant_max) {
            throw config_error("synth_sources: dominance ratio " +
                               std::to_string(other_max / dominant_max) + " exceeds epsilon " +
                               std::to_string(cfg.epsilon_level) + " on " + where);
        }
    }
    if (cfg.condition == Condition::Sap && !satisfies_nna(sources))
        throw config_error("synth_sources: SAP scenario fails the strict non-overlap check");
    return sources;
}

/// Noiseless mixing X = A S.
inline DataMatrix mix(const Eigen::MatrixXd& A, const std::vector<Spectrum>& sources) {
    if (sources.empty()) throw data_error("mix: no sources");
    if (A.cols() != static_cast<Eigen::Index>(sources.size()))
        throw data_error("mix: mixing columns must equal source count");
    const DataMatrix S = rows_to_matrix(sources);
    DataMatrix X;
    X.dx = S.dx;
    X.origin = S.origin;
    X.values = A * S.values;
    return X;
}

/// Add i.i.d. zero-mean Gaussian noise calibrated to the requested SNR:
/// sigma^2 = mean(X^2) / 10^(snr/10). Negative samples are clamped to zero
/// (the cone estimator needs nonnegative data). +infinity = no noise.
/// Deterministic per seed; see RandomStream for the portable generator choice.
inline DataMatrix add_noise(const DataMatrix& X, double snr_db, std::uint64_t seed) {
    if (std::isinf(snr_db) && snr_db > 0) return X;
    const double power = X.values.array().square().mean();
    if (!(power > 0.0)) throw data_error("add_noise: data is identically zero");
    const double sigma = std::sqrt(power * std::pow(10.0, -snr_db / 10.0));
    RandomStream rng(seed);
    DataMatrix out = X;
    for (Eigen::Index i = 0; i < out.values.rows(); ++i)
        for (Eigen::Index j = 0; j < out.values.cols(); ++j) {
            const double v = out.values(i, j) + sigma * rng.gaussian();
            out.values(i, j) = v < 0.0 ? 0.0 : v;
        }
    return out;
}

} // namespace peaksharp
