#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "peaksharp/csv_io.hpp"
#include "peaksharp/scenario_io.hpp"

using namespace peaksharp;
using Catch::Approx;

namespace {

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("peaksharp_test_" + name);
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

constexpr const char* kScenarioText = R"(# sample scenario
[grid]
samples = 100
dx = 0.5
origin = -2

[scenario]
condition = dps
epsilon = 0.1
snr_db = 45
seed = 9

[mixing]
row = 0.6 0.8
row = 0.8 0.6

[source]
name = left
peak = 10 1.5 3.0
window = 20 30

[source]
peak = 30 1.0 2.0
)";

} // namespace

TEST_CASE("spectra csv round-trips byte for byte") {
    std::vector<Spectrum> spectra(2);
    spectra[0] = Spectrum{{1.0, 1.0 / 3.0, 6.02214076e23, 1e-17}, 0.05, -3.25};
    spectra[1] = Spectrum{{0.0, 2.0, 0.1 + 0.2, 7.7}, 0.05, -3.25};

    const auto p1 = temp_file("roundtrip1.csv");
    const auto p2 = temp_file("roundtrip2.csv");
    write_spectra(p1.string(), "mixture", spectra);

    const SpectraFile back = read_spectra(p1.string());
    CHECK(back.labels == std::vector<std::string>{"mixture_0", "mixture_1"});
    CHECK(back.data.dx == 0.05);
    CHECK(back.data.origin == -3.25);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 4; ++j)
            CHECK(back.data.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) ==
                  spectra[i].values[j]);

    write_spectra(p2.string(), back.labels, back.data.values, back.data.dx, back.data.origin);
    CHECK(slurp(p1) == slurp(p2));
    std::filesystem::remove(p1);
    std::filesystem::remove(p2);
}

TEST_CASE("matrix io and score files") {
    Eigen::MatrixXd M(2, 3);
    M << 0.25, 0.5, 0.25, 1e-30, 3.5, 2.0;
    const auto p = temp_file("matrix.csv");
    write_matrix(p.string(), M);
    const Eigen::MatrixXd back = read_matrix(p.string());
    CHECK((back - M).cwiseAbs().maxCoeff() == 0.0);
    std::filesystem::remove(p);

    ColumnScores scores;
    scores.kept_indices = {0, 4, 7};
    scores.scores = {0.5, 0.0, 1.25e-3};
    const auto s = temp_file("scores.csv");
    write_scores(s.string(), scores);
    const std::string text = slurp(s);
    CHECK(text.find("column,score") == 0);
    CHECK(text.find("4,0") != std::string::npos);
    std::filesystem::remove(s);
}

TEST_CASE("meta files hold ordered key-value lines") {
    const auto p = temp_file("meta.meta");
    write_meta(p.string(), {{"k", "1.5"}, {"mode", "auto"}});
    const auto entries = read_meta(p.string());
    REQUIRE(entries.size() == 2);
    CHECK(entries[0] == std::pair<std::string, std::string>{"k", "1.5"});
    CHECK(entries[1].second == "auto");
    std::filesystem::remove(p);
}

TEST_CASE("missing files raise data errors") {
    CHECK_THROWS_AS(read_spectra("/nonexistent/path.csv"), data_error);
    CHECK_THROWS_AS(read_meta("/nonexistent/path.meta"), data_error);
}

TEST_CASE("scenario parsing") {
    SECTION("happy path") {
        std::istringstream in(kScenarioText);
        const ScenarioConfig cfg = parse_scenario(in, "inline");
        CHECK(cfg.grid.samples == 100);
        CHECK(cfg.grid.dx == 0.5);
        CHECK(cfg.grid.origin == -2.0);
        CHECK(cfg.condition == Condition::Dps);
        CHECK(cfg.epsilon_level == Approx(0.1));
        REQUIRE(cfg.snr_db.has_value());
        CHECK(*cfg.snr_db == 45.0);
        CHECK(cfg.seed == 9);
        REQUIRE(cfg.sources.size() == 2);
        CHECK(cfg.sources[0].name == "left");
        CHECK(cfg.sources[1].name == "s1");  // default name
        REQUIRE(cfg.sources[0].dominant_window.has_value());
        CHECK(cfg.sources[0].dominant_window->first == 20);
        CHECK(cfg.mixing(1, 0) == 0.8);
    }
    SECTION("snr inf disables noise") {
        std::string text = kScenarioText;
        text.replace(text.find("snr_db = 45"), 11, "snr_db = inf");
        std::istringstream in(text);
        CHECK_FALSE(parse_scenario(in, "inline").snr_db.has_value());
    }
    SECTION("too few samples is a config error with a location") {
        std::string text = kScenarioText;
        text.replace(text.find("samples = 100"), 13, "samples = 2  ");
        std::istringstream in(text);
        try {
            parse_scenario(in, "inline");
            FAIL("expected config_error");
        } catch (const config_error& e) {
            CHECK(std::string(e.what()).find("inline:") != std::string::npos);
        }
    }
    SECTION("unknown keys are rejected") {
        std::string text = kScenarioText;
        text.replace(text.find("origin = -2"), 11, "bogus = 1  ");
        std::istringstream in(text);
        CHECK_THROWS_AS(parse_scenario(in, "inline"), config_error);
    }
    SECTION("ragged mixing rows are rejected") {
        std::string text = kScenarioText;
        text.replace(text.find("row = 0.8 0.6"), 13, "row = 0.8    ");
        std::istringstream in(text);
        CHECK_THROWS_AS(parse_scenario(in, "inline"), config_error);
    }
    SECTION("malformed peak line") {
        std::string text = kScenarioText;
        text.replace(text.find("peak = 30 1.0 2.0"), 17, "peak = 30 1.0    ");
        std::istringstream in(text);
        CHECK_THROWS_AS(parse_scenario(in, "inline"), config_error);
    }
}
