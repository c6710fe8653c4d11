#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>

#include "peaksharp/synth.hpp"

using namespace peaksharp;
using Catch::Approx;

namespace {

ScenarioConfig base_config(Condition cond) {
    ScenarioConfig cfg;
    cfg.grid = GridSpec{1000, 0.1, 0.0};
    cfg.condition = cond;
    cfg.epsilon_level = cond == Condition::Dps ? 0.08 : 0.0;
    cfg.mixing.resize(2, 2);
    cfg.mixing << 0.6, 0.8, 0.8, 0.6;
    cfg.sources.resize(2);
    cfg.sources[0].name = "a";
    cfg.sources[0].peaks = {{20.0, 1.0, 3.0}, {60.0, 0.8, 5.0}};
    cfg.sources[0].dominant_window = {{595, 605}};
    cfg.sources[1].name = "b";
    cfg.sources[1].peaks = {{22.0, 1.2, 2.0}, {80.0, 0.8, 5.0}};
    cfg.sources[1].dominant_window = {{795, 805}};
    return cfg;
}

} // namespace

TEST_CASE("sap sources vanish on each other's windows") {
    const ScenarioConfig cfg = base_config(Condition::Sap);
    const std::vector<Spectrum> S = synth_sources(cfg);
    for (std::size_t j = 595; j <= 605; ++j) CHECK(S[1].values[j] == 0.0);
    for (std::size_t j = 795; j <= 805; ++j) CHECK(S[0].values[j] == 0.0);
    CHECK(satisfies_nna(S));
    // truncation: tails vanish beyond ten half-widths
    for (std::size_t j = 0; j < S[0].size(); ++j) {
        const double x = S[0].axis(j);
        if (std::abs(x - 20.0) > 10.0 && std::abs(x - 60.0) > 8.0) CHECK(S[0].values[j] == 0.0);
    }
}

TEST_CASE("dps sources keep full tails and bounded dominance") {
    const ScenarioConfig cfg = base_config(Condition::Dps);
    const std::vector<Spectrum> S = synth_sources(cfg);
    CHECK_FALSE(satisfies_nna(S));  // strict non-overlap fails under DPS
    for (const Spectrum& s : S)
        for (double v : s.values) CHECK(v > 0.0);
    // post-hoc dominance scan mirrors what the generator enforces
    double dominant = 0.0, other = 0.0;
    for (std::size_t j = 595; j <= 605; ++j) {
        dominant = std::max(dominant, S[0].values[j]);
        other = std::max(other, S[1].values[j]);
    }
    CHECK(other <= cfg.epsilon_level * dominant);
}

TEST_CASE("dominance violations name the window") {
    ScenarioConfig cfg = base_config(Condition::Dps);
    cfg.epsilon_level = 1e-4;  // far tighter than the actual leakage
    try {
        synth_sources(cfg);
        FAIL("expected a config error");
    } catch (const config_error& e) {
        const std::string msg = e.what();
        CHECK(msg.find("window") != std::string::npos);
        CHECK(msg.find("epsilon") != std::string::npos);
    }
}

TEST_CASE("scenario validation rejects inconsistent setups") {
    ScenarioConfig cfg = base_config(Condition::Sap);
    cfg.epsilon_level = 0.1;  // sap demands zero leakage level
    CHECK_THROWS_AS(cfg.validate(), config_error);

    cfg = base_config(Condition::Dps);
    cfg.epsilon_level = 0.0;
    CHECK_THROWS_AS(cfg.validate(), config_error);

    cfg = base_config(Condition::Sap);
    cfg.grid.samples = 2;
    CHECK_THROWS_AS(cfg.validate(), config_error);

    cfg = base_config(Condition::Sap);
    cfg.sources[0].peaks[0].center = 5000.0;  // off the grid
    CHECK_THROWS_AS(cfg.validate(), config_error);

    cfg = base_config(Condition::Sap);
    cfg.mixing.resize(2, 3);
    cfg.mixing.setOnes();
    CHECK_THROWS_AS(cfg.validate(), config_error);
}

TEST_CASE("mixing is the plain matrix product") {
    const ScenarioConfig cfg = base_config(Condition::Dps);
    const std::vector<Spectrum> S = synth_sources(cfg);

    SECTION("identity mixing returns the sources") {
        const DataMatrix X = mix(Eigen::MatrixXd::Identity(2, 2), S);
        for (std::size_t j = 0; j < S[0].size(); ++j) {
            CHECK(X.values(0, static_cast<Eigen::Index>(j)) == S[0].values[j]);
            CHECK(X.values(1, static_cast<Eigen::Index>(j)) == S[1].values[j]);
        }
    }
    SECTION("single source with a (2,1) column") {
        Eigen::MatrixXd col(2, 1);
        col << 2.0, 1.0;
        const DataMatrix X = mix(col, {S[0]});
        for (std::size_t j = 0; j < S[0].size(); ++j) {
            CHECK(X.values(0, static_cast<Eigen::Index>(j)) == Approx(2.0 * S[0].values[j]));
            CHECK(X.values(1, static_cast<Eigen::Index>(j)) == Approx(1.0 * S[0].values[j]));
        }
    }
    SECTION("probe samples against direct arithmetic") {
        const DataMatrix X = mix(cfg.mixing, S);
        for (const std::size_t j : {0UL, 137UL, 600UL, 801UL, 999UL}) {
            const double x0 = 0.6 * S[0].values[j] + 0.8 * S[1].values[j];
            const double x1 = 0.8 * S[0].values[j] + 0.6 * S[1].values[j];
            CHECK(X.values(0, static_cast<Eigen::Index>(j)) == Approx(x0).epsilon(1e-15));
            CHECK(X.values(1, static_cast<Eigen::Index>(j)) == Approx(x1).epsilon(1e-15));
        }
    }
    SECTION("dimension mismatch") {
        Eigen::MatrixXd wide(2, 3);
        wide.setOnes();
        CHECK_THROWS_AS(mix(wide, S), data_error);
    }
}

TEST_CASE("mix is linear in both arguments") {
    const ScenarioConfig cfg = base_config(Condition::Dps);
    const std::vector<Spectrum> S = synth_sources(cfg);
    const DataMatrix X1 = mix(cfg.mixing, S);
    const DataMatrix X2 = mix(2.0 * cfg.mixing, S);
    CHECK(((X2.values - 2.0 * X1.values).cwiseAbs().maxCoeff()) <= 1e-12);

    std::vector<Spectrum> doubled = S;
    for (Spectrum& s : doubled)
        for (double& v : s.values) v *= 3.0;
    const DataMatrix X3 = mix(cfg.mixing, doubled);
    CHECK(((X3.values - 3.0 * X1.values).cwiseAbs().maxCoeff()) <= 1e-9);
}

TEST_CASE("noise injection is calibrated and reproducible") {
    // Large positive baseline keeps the zero-clamp inactive so the realized
    // noise power can be measured directly.
    DataMatrix X;
    X.dx = 1.0;
    X.values = Eigen::MatrixXd::Constant(4, 5000, 10.0);

    SECTION("infinite snr is a no-op") {
        const DataMatrix Y = add_noise(X, std::numeric_limits<double>::infinity(), 3);
        CHECK((Y.values - X.values).cwiseAbs().maxCoeff() == 0.0);
    }
    SECTION("realized snr is within half a dB") {
        const double snr = 30.0;
        const DataMatrix Y = add_noise(X, snr, 12345);
        const double signal_power = X.values.array().square().mean();
        const double noise_power = (Y.values - X.values).array().square().mean();
        const double realized = 10.0 * std::log10(signal_power / noise_power);
        CHECK(realized == Approx(snr).margin(0.5));
    }
    SECTION("same seed, same bytes; different seed differs") {
        const DataMatrix Y1 = add_noise(X, 40.0, 99);
        const DataMatrix Y2 = add_noise(X, 40.0, 99);
        CHECK((Y1.values - Y2.values).cwiseAbs().maxCoeff() == 0.0);
        const DataMatrix Y3 = add_noise(X, 40.0, 100);
        CHECK((Y1.values - Y3.values).cwiseAbs().maxCoeff() > 0.0);
    }
    SECTION("noisy output is clamped at zero") {
        DataMatrix tiny;
        tiny.values = Eigen::MatrixXd::Constant(2, 4000, 0.01);
        const DataMatrix Y = add_noise(tiny, 5.0, 7);
        CHECK(Y.values.minCoeff() >= 0.0);
    }
    SECTION("zero data is rejected") {
        DataMatrix zero;
        zero.values = Eigen::MatrixXd::Zero(2, 10);
        CHECK_THROWS_AS(add_noise(zero, 30.0, 1), data_error);
    }
}
