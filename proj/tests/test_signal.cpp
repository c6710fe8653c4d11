#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>

#include "peaksharp/lorentzian.hpp"
#include "peaksharp/signal.hpp"

using namespace peaksharp;
using Catch::Approx;

namespace {

Spectrum sampled_lorentz(const LorentzPeak& p, std::size_t n, double dx, double origin) {
    return sample_peaks({p}, n, dx, origin);
}

} // namespace

TEST_CASE("second difference of a constant is zero") {
    Spectrum s{std::vector<double>(64, 3.25), 0.1, 0.0};
    const Spectrum d = second_difference(s);
    for (double v : d.values) CHECK(v == Approx(0.0).margin(1e-12));
}

TEST_CASE("second difference is exact on quadratics") {
    const double dx = 0.25;
    Spectrum s{std::vector<double>(40), dx, 0.0};
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double x = s.axis(i);
        s.values[i] = x * x;
    }
    const Spectrum d = second_difference(s);
    for (std::size_t i = 0; i < d.size(); ++i)
        CHECK(d.values[i] == Approx(2.0).epsilon(1e-10));  // one-sided ends included
}

TEST_CASE("second difference tracks the analytic second derivative") {
    const LorentzPeak p{10.0, 5.0, 5.0};
    const Spectrum s = sampled_lorentz(p, 2001, 0.01, 0.0);
    const Spectrum d = second_difference(s);
    const double scale = 2.0 * p.height / (p.hwhm * p.hwhm);
    for (std::size_t i = 1; i + 1 < s.size(); ++i) {
        const double analytic = second_derivative(p, s.axis(i));
        // relative check with a small absolute floor near the zeros of L''
        CHECK(std::abs(d.values[i] - analytic) <= 1e-5 * std::abs(analytic) + 1e-6 * scale);
    }
}

TEST_CASE("second difference needs at least three samples") {
    Spectrum tiny{std::vector<double>{1.0, 2.0}, 1.0, 0.0};
    CHECK_THROWS_AS(second_difference(tiny), data_error);
    Spectrum three{std::vector<double>{1.0, 2.0, 1.0}, 1.0, 0.0};
    CHECK_NOTHROW(second_difference(three));
}

TEST_CASE("sharpen with k = 0 is the identity") {
    Spectrum s{std::vector<double>{0.0, 1.0, 4.0, 1.0, 0.0}, 0.5, -1.0};
    const Spectrum out = sharpen(s, 0.0);
    CHECK(out.values == s.values);
    CHECK(out.dx == s.dx);
    CHECK(out.origin == s.origin);
    CHECK_THROWS_AS(sharpen(s, -0.1), config_error);
}

TEST_CASE("sharpened sampled peak rises by the sharpening factor") {
    // k = 20 with w = 5, h = 5: the peak sample reaches h (1 + 2k/w^2) = 13.
    const LorentzPeak p{50.0, 5.0, 5.0};
    const Spectrum s = sampled_lorentz(p, 10001, 0.01, 0.0);
    const Spectrum out = sharpen(s, 20.0, /*clamp_negative=*/false);
    const double top = *std::max_element(out.values.begin(), out.values.end());
    CHECK(top == Approx(13.0).margin(0.01));
}

TEST_CASE("sharpening operator is linear") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> coeff(-3.0, 3.0);
    std::uniform_real_distribution<double> value(0.0, 10.0);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 200;
        Spectrum s1{std::vector<double>(n), 0.05, 0.0};
        Spectrum s2{std::vector<double>(n), 0.05, 0.0};
        for (std::size_t i = 0; i < n; ++i) {
            s1.values[i] = value(rng);
            s2.values[i] = value(rng);
        }
        const double a = coeff(rng), b = coeff(rng), k = 0.8;
        Spectrum combo{std::vector<double>(n), 0.05, 0.0};
        for (std::size_t i = 0; i < n; ++i) combo.values[i] = a * s1.values[i] + b * s2.values[i];
        const Spectrum lhs = sharpen(combo, k, false);
        const Spectrum r1 = sharpen(s1, k, false);
        const Spectrum r2 = sharpen(s2, k, false);
        double scale = 0.0, worst = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double rhs = a * r1.values[i] + b * r2.values[i];
            scale = std::max(scale, std::abs(lhs.values[i]));
            worst = std::max(worst, std::abs(lhs.values[i] - rhs));
        }
        CHECK(worst <= 1e-10 * std::max(scale, 1.0));
    }
}

TEST_CASE("sharpening keeps the peak location of a lone line") {
    const LorentzPeak p{30.0, 2.0, 4.0};
    const Spectrum s = sampled_lorentz(p, 1200, 0.05, 0.0);
    const auto argmax = [](const Spectrum& sp) {
        return std::distance(sp.values.begin(),
                             std::max_element(sp.values.begin(), sp.values.end()));
    };
    const auto base = argmax(s);
    const double k_max = max_safe_weight(p.hwhm);
    for (double k : {0.0, 0.3 * k_max, 0.7 * k_max, k_max})
        CHECK(argmax(sharpen(s, k)) == base);
}

TEST_CASE("nonnegativity transfers to sums of safe-width lines") {
    const double w0 = 1.5;
    const std::vector<LorentzPeak> peaks{{10.0, 1.5, 2.0}, {14.0, 2.5, 5.0}, {30.0, 4.0, 1.0}};
    const Spectrum s = sample_peaks(peaks, 2000, 0.02, 0.0);
    const Spectrum out = sharpen(s, max_safe_weight(w0), /*clamp_negative=*/false);
    const double smax = *std::max_element(s.values.begin(), s.values.end());
    const double omin = *std::min_element(out.values.begin(), out.values.end());
    CHECK(omin >= -1e-6 * smax);
}

TEST_CASE("clamping floors negative sharpened samples at zero") {
    const LorentzPeak p{10.0, 1.0, 5.0};
    const Spectrum s = sampled_lorentz(p, 1000, 0.02, 0.0);
    const double k = 3.0 * max_safe_weight(p.hwhm);
    const Spectrum raw = sharpen(s, k, false);
    const Spectrum clamped = sharpen(s, k, true);
    CHECK(*std::min_element(raw.values.begin(), raw.values.end()) < 0.0);
    CHECK(*std::min_element(clamped.values.begin(), clamped.values.end()) == 0.0);
}

TEST_CASE("narrowest half-width estimation") {
    SECTION("single sampled line, w = 4") {
        const Spectrum s = sampled_lorentz({40.0, 4.0, 1.0}, 800, 0.1, 0.0);
        const PeakEstimate est = estimate_min_hwhm(s, 0.5);
        CHECK(est.hwhm_axis == Approx(4.0).margin(0.1));
        CHECK(est.height == Approx(1.0).margin(1e-3));
    }
    SECTION("two lines: the narrower wins") {
        const Spectrum s =
            sample_peaks({{30.0, 2.0, 1.0}, {90.0, 6.0, 1.0}}, 1200, 0.1, 0.0);
        const PeakEstimate est = estimate_min_hwhm(s, 0.3);
        CHECK(est.hwhm_axis == Approx(2.0).margin(0.15));
    }
    SECTION("flat zero spectrum has no peak") {
        Spectrum flat{std::vector<double>(100, 0.0), 0.1, 0.0};
        CHECK_THROWS_AS(estimate_min_hwhm(flat, 0.5), data_error);
    }
    SECTION("prominence must be a fraction") {
        const Spectrum s = sampled_lorentz({5.0, 1.0, 1.0}, 100, 0.1, 0.0);
        CHECK_THROWS_AS(estimate_min_hwhm(s, 0.0), config_error);
        CHECK_THROWS_AS(estimate_min_hwhm(s, 1.0), config_error);
    }
    SECTION("error stays within one grid step once w >= 5 dx") {
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> widths(0.5, 4.0);
        for (int trial = 0; trial < 20; ++trial) {
            const double w = widths(rng);
            const double dx = w / (5.0 + 15.0 * (trial % 4));
            const Spectrum s = sampled_lorentz({25.0, w, 2.0}, static_cast<std::size_t>(50.0 / dx), dx, 0.0);
            const PeakEstimate est = estimate_min_hwhm(s, 0.4);
            CHECK(std::abs(est.hwhm_axis - w) <= dx);
        }
    }
}

TEST_CASE("weight suggestion from an estimated width") {
    CHECK(suggest_weight(4.0, 1.0) == Approx(128.0 / 9.0));
    CHECK(suggest_weight(3.0 / (2.0 * std::sqrt(2.0)), 1.0) == Approx(1.0).epsilon(1e-12));
    CHECK(suggest_weight(5.0, 0.5) == Approx(100.0 / 9.0));
    CHECK_THROWS_AS(suggest_weight(4.0, 0.0), config_error);
    CHECK_THROWS_AS(suggest_weight(4.0, 1.5), config_error);
    CHECK_THROWS_AS(suggest_weight(0.0, 1.0), config_error);
}

TEST_CASE("peak sampling with truncation") {
    const LorentzPeak p{50.0, 1.0, 2.0};
    const Spectrum s = sample_peaks({p}, 2000, 0.05, 0.0, 10.0);
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (std::abs(s.axis(i) - p.center) > 10.0)
            CHECK(s.values[i] == 0.0);
        else
            CHECK(s.values[i] == Approx(eval(p, s.axis(i))));
    }
}
