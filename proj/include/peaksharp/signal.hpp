#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "peaksharp/errors.hpp"
#include "peaksharp/lorentzian.hpp"

namespace peaksharp {

/// A sampled signal on a uniform grid. `dx` is the grid spacing in
/// acquisition-axis units, `origin` the axis value of the first sample.
struct Spectrum {
    std::vector<double> values;
    double dx = 1.0;
    double origin = 0.0;

    std::size_t size() const { return values.size(); }
    double axis(std::size_t i) const { return origin + static_cast<double>(i) * dx; }

    void validate() const {
        if (values.size() < 3) throw data_error("Spectrum: need at least 3 samples");
        if (!(dx > 0.0)) throw config_error("Spectrum: dx must be positive");
    }
};

/// Central second difference (s[i-1] - 2 s[i] + s[i+1]) / dx^2 at interior
/// points. The two boundary samples use one-sided stencils of matching order
/// (with only 3 samples they fall back to the shifted 3-point formula), so the
/// output keeps the input length. Exact on quadratics.
inline Spectrum second_difference(const Spectrum& s) {
    s.validate();
    const std::size_t p = s.size();
    const double inv = 1.0 / (s.dx * s.dx);
    const std::vector<double>& v = s.values;
    Spectrum out{std::vector<double>(p), s.dx, s.origin};
    for (std::size_t i = 1; i + 1 < p; ++i)
        out.values[i] = (v[i - 1] - 2.0 * v[i] + v[i + 1]) * inv;
    if (p >= 4) {
        out.values[0] = (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) * inv;
        out.values[p - 1] = (2.0 * v[p - 1] - 5.0 * v[p - 2] + 4.0 * v[p - 3] - v[p - 4]) * inv;
    } else {
        out.values[0] = (v[0] - 2.0 * v[1] + v[2]) * inv;
        out.values[p - 1] = out.values[0];
    }
    return out;
}

/// Weighted sharpening of a sampled signal: s - k s''. The weight k carries
/// axis units squared (it multiplies the dx^2-normalized second difference),
/// so results are invariant under resampling. With `clamp_negative` set,
/// values driven below zero are floored at 0 after the subtraction.
inline Spectrum sharpen(const Spectrum& s, double k, bool clamp_negative = true) {
    if (k < 0.0) throw config_error("sharpen: weight k must be nonnegative");
    s.validate();
    if (k == 0.0) return s;
    Spectrum d2 = second_difference(s);
    Spectrum out{std::vector<double>(s.size()), s.dx, s.origin};
    for (std::size_t i = 0; i < s.size(); ++i) {
        double v = s.values[i] - k * d2.values[i];
        if (clamp_negative && v < 0.0) v = 0.0;
        out.values[i] = v;
    }
    return out;
}

/// A detected local maximum with its measured half width.
struct PeakEstimate {
    std::size_t index = 0;       // sample position of the maximum
    double height = 0.0;
    double hwhm_samples = 1.0;   // half width at half maximum, in samples
    double hwhm_axis = 0.0;      // hwhm_samples * dx
};

/// Narrowest-peak width estimate. Detects local maxima above
/// prominence * max(s), walks each flank to the first sample at or below half
/// height (linear interpolation for sub-sample accuracy), and returns the
/// estimate with the smallest width. Peaks whose half-height crossings run off
/// the grid are skipped.
inline PeakEstimate estimate_min_hwhm(const Spectrum& s, double prominence) {
    s.validate();
    if (!(prominence > 0.0 && prominence < 1.0))
        throw config_error("estimate_min_hwhm: prominence must be in (0,1)");
    const std::vector<double>& v = s.values;
    const std::size_t p = v.size();
    const double vmax = *std::max_element(v.begin(), v.end());
    if (!(vmax > 0.0)) throw data_error("estimate_min_hwhm: no peak found (signal not positive)");
    const double threshold = prominence * vmax;

    std::optional<PeakEstimate> best;
    for (std::size_t i = 1; i + 1 < p; ++i) {
        if (!(v[i] > v[i - 1] && v[i] >= v[i + 1])) continue;
        if (!(v[i] > threshold)) continue;
        const double half = 0.5 * v[i];

        std::size_t l = i;
        while (l > 0 && v[l] > half) --l;
        if (v[l] > half) continue;  // ran off the left edge
        const double frac_l = (half - v[l]) / (v[l + 1] - v[l]);
        const double left = static_cast<double>(l) + frac_l;

        std::size_t r = i;
        while (r + 1 < p && v[r] > half) ++r;
        if (v[r] > half) continue;  // ran off the right edge
        const double frac_r = (half - v[r]) / (v[r - 1] - v[r]);
        const double right = static_cast<double>(r) - frac_r;

        // narrower than one sample is unresolvable on this grid
        const double hwhm_samples = std::max(0.5 * (right - left), 1.0);
        const double hwhm_axis = hwhm_samples * s.dx;
        if (!best || hwhm_axis < best->hwhm_axis)
            best = PeakEstimate{i, v[i], hwhm_samples, hwhm_axis};
    }
    if (!best) throw data_error("estimate_min_hwhm: no peak above prominence threshold");
    return *best;
}

/// Weight suggestion from an estimated narrowest half-width:
/// fraction * (8/9) w^2. fraction = 1 saturates the nonnegativity bound.
inline double suggest_weight(double w_estimate, double fraction) {
    if (!(w_estimate > 0.0)) throw config_error("suggest_weight: hwhm estimate must be positive");
    if (!(fraction > 0.0 && fraction <= 1.0))
        throw config_error("suggest_weight: fraction must be in (0,1]");
    return fraction * max_safe_weight(w_estimate);
}

/// Sample a sum of Lorentzian peaks on a uniform grid. When `truncate_radius`
/// is positive, each peak is zeroed outside center +- truncate_radius * hwhm.
inline Spectrum sample_peaks(const std::vector<LorentzPeak>& peaks, std::size_t samples,
                             double dx, double origin, double truncate_radius = 0.0) {
    if (samples < 3) throw data_error("sample_peaks: need at least 3 samples");
    if (!(dx > 0.0)) throw config_error("sample_peaks: dx must be positive");
    Spectrum out{std::vector<double>(samples, 0.0), dx, origin};
    for (const LorentzPeak& peak : peaks) {
        peak.validate();
        std::size_t lo = 0, hi = samples;
        if (truncate_radius > 0.0) {
            const double span = truncate_radius * peak.hwhm;
            const double a = (peak.center - span - origin) / dx;
            const double b = (peak.center + span - origin) / dx;
            lo = a <= 0.0 ? 0 : static_cast<std::size_t>(std::ceil(a));
            hi = b < 0.0 ? 0 : std::min(samples, static_cast<std::size_t>(std::floor(b)) + 1);
        }
        for (std::size_t i = lo; i < hi; ++i)
            out.values[i] += eval(peak, out.axis(i));
    }
    return out;
}

} // namespace peaksharp
