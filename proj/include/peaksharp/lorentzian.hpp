#pragma once

#include <cmath>
#include <string>

#include "peaksharp/errors.hpp"

namespace peaksharp {

/// Analytic Lorentzian line: L(x) = w^2 h / ((x - x0)^2 + w^2).
/// `hwhm` is the half width at half maximum w (so the full width is 2w),
/// `height` the peak value at the center.
struct LorentzPeak {
    double center = 0.0;
    double hwhm = 1.0;
    double height = 1.0;

    void validate() const {
        if (!(hwhm > 0.0)) throw config_error("LorentzPeak: hwhm must be positive");
        if (!(height > 0.0)) throw config_error("LorentzPeak: height must be positive");
    }
};

inline double eval(const LorentzPeak& peak, double x) {
    const double w2 = peak.hwhm * peak.hwhm;
    const double u = x - peak.center;
    return w2 * peak.height / (u * u + w2);
}

inline double first_derivative(const LorentzPeak& peak, double x) {
    const double w2 = peak.hwhm * peak.hwhm;
    const double u = x - peak.center;
    const double d = u * u + w2;
    return -2.0 * w2 * peak.height * u / (d * d);
}

inline double second_derivative(const LorentzPeak& peak, double x) {
    const double w2 = peak.hwhm * peak.hwhm;
    const double u = x - peak.center;
    const double u2 = u * u;
    const double d = u2 + w2;
    return 2.0 * w2 * peak.height * (3.0 * u2 - w2) / (d * d * d);
}

/// Weighted sharpened profile D_k(x) = L(x) - k L''(x). At the center this
/// equals height * (1 + 2k/w^2); it stays nonnegative everywhere iff
/// k <= max_safe_weight(w).
inline double sharpened(const LorentzPeak& peak, double k, double x) {
    if (k < 0.0) throw config_error("sharpened: weight k must be nonnegative");
    const double w2 = peak.hwhm * peak.hwhm;
    const double u = x - peak.center;
    const double u2 = u * u;
    const double d = u2 + w2;
    const double numerator = u2 * u2 + 2.0 * (w2 - 3.0 * k) * u2 + w2 * w2 + 2.0 * k * w2;
    return w2 * peak.height * numerator / (d * d * d);
}

/// Largest weight preserving nonnegativity of the sharpened profile: (8/9) w^2.
/// The bound is tight; callers wanting slack apply their own factor.
inline double max_safe_weight(double hwhm) {
    if (!(hwhm > 0.0)) throw config_error("max_safe_weight: hwhm must be positive");
    return (8.0 / 9.0) * (hwhm * hwhm);
}

/// Peak amplification of the sharpened profile: alpha = 1 + 2k/w^2.
/// Equals 25/9 at the safe-weight bound.
inline double sharpening_factor(double hwhm, double k) {
    if (!(hwhm > 0.0)) throw config_error("sharpening_factor: hwhm must be positive");
    if (k < 0.0) throw config_error("sharpening_factor: weight k must be nonnegative");
    return 1.0 + 2.0 * k / (hwhm * hwhm);
}

/// Sharpening weight bundled with the reference half-width its bound came
/// from. The checked constructor enforces 0 < k <= (8/9) w_ref^2; `unchecked`
/// bypasses the bound for experiments that intentionally exceed it.
struct SharpenWeight {
    double k;
    double w_ref;

    static SharpenWeight checked(double k, double w_ref) {
        if (!(w_ref > 0.0)) throw config_error("SharpenWeight: reference hwhm must be positive");
        if (!(k > 0.0)) throw config_error("SharpenWeight: weight must be positive");
        const double bound = max_safe_weight(w_ref);
        if (k > bound) {
            throw config_error("SharpenWeight: k=" + std::to_string(k) +
                               " exceeds nonnegativity bound " + std::to_string(bound) +
                               " for hwhm=" + std::to_string(w_ref));
        }
        return SharpenWeight{k, w_ref};
    }

    static SharpenWeight unchecked(double k, double w_ref) { return SharpenWeight{k, w_ref}; }

    bool exceeds_bound() const { return k > max_safe_weight(w_ref); }
};

} // namespace peaksharp
