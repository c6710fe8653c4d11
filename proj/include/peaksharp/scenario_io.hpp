#pragma once

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "peaksharp/csv_io.hpp"
#include "peaksharp/errors.hpp"
#include "peaksharp/synth.hpp"

namespace peaksharp {

// Scenario config files are plain sectioned text:
//
//   [grid]
//   samples = 2000
//   dx = 0.05
//   origin = 0
//
//   [scenario]
//   condition = dps          # sap | dps
//   epsilon = 0.08           # DPS leakage bound (omit or 0 under sap)
//   snr_db = inf             # optional; 'inf' disables noise
//   seed = 42
//
//   [mixing]
//   row = 0.6 0.8
//   row = 0.8 0.6
//
//   [source]                 # one section per source
//   name = s1
//   peak = 10 1.5 3.0        # center hwhm height
//   window = 1190 1210       # optional dominance window, sample indices
//
// '#' starts a comment; blank lines are ignored.

namespace detail {

inline std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

inline std::vector<double> parse_numbers(const std::string& text, const std::string& where) {
    std::vector<double> out;
    std::istringstream in(text);
    std::string token;
    while (in >> token) out.push_back(parse_double(token, where));
    return out;
}

} // namespace detail

inline ScenarioConfig parse_scenario(std::istream& in, const std::string& name) {
    ScenarioConfig cfg;
    cfg.snr_db = std::nullopt;
    std::vector<std::vector<double>> mixing_rows;
    std::string section;
    std::string line;
    std::size_t lineno = 0;

    auto fail = [&](const std::string& msg) -> void {
        throw config_error(name + ":" + std::to_string(lineno) + ": " + msg);
    };

    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']') fail("unterminated section header");
            section = detail::trim(line.substr(1, line.size() - 2));
            if (section == "source") cfg.sources.emplace_back();
            else if (section != "grid" && section != "scenario" && section != "mixing")
                fail("unknown section [" + section + "]");
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string::npos) fail("expected 'key = value'");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        const std::string where = name + ":" + std::to_string(lineno);

        if (section == "grid") {
            if (key == "samples") {
                const double v = parse_double(value, where);
                if (!(v >= 3.0)) fail("samples must be at least 3");
                cfg.grid.samples = static_cast<std::size_t>(v);
            } else if (key == "dx") cfg.grid.dx = parse_double(value, where);
            else if (key == "origin") cfg.grid.origin = parse_double(value, where);
            else fail("unknown grid key '" + key + "'");
        } else if (section == "scenario") {
            if (key == "condition") {
                if (value == "sap") cfg.condition = Condition::Sap;
                else if (value == "dps") cfg.condition = Condition::Dps;
                else fail("condition must be sap or dps");
            } else if (key == "epsilon") cfg.epsilon_level = parse_double(value, where);
            else if (key == "snr_db") {
                if (value == "inf") cfg.snr_db = std::nullopt;
                else cfg.snr_db = parse_double(value, where);
            } else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_double(value, where));
            else fail("unknown scenario key '" + key + "'");
        } else if (section == "mixing") {
            if (key != "row") fail("mixing section only takes 'row' entries");
            mixing_rows.push_back(detail::parse_numbers(value, where));
            if (mixing_rows.back().empty()) fail("empty mixing row");
            if (mixing_rows.back().size() != mixing_rows.front().size())
                fail("mixing rows have different lengths");
        } else if (section == "source") {
            SourceSpec& src = cfg.sources.back();
            if (key == "name") src.name = value;
            else if (key == "peak") {
                const std::vector<double> v = detail::parse_numbers(value, where);
                if (v.size() != 3) fail("peak needs 'center hwhm height'");
                src.peaks.push_back(LorentzPeak{v[0], v[1], v[2]});
            } else if (key == "window") {
                const std::vector<double> v = detail::parse_numbers(value, where);
                if (v.size() != 2 || v[0] < 0 || v[1] < v[0]) fail("window needs 'lo hi' sample indices");
                src.dominant_window = {static_cast<std::size_t>(v[0]), static_cast<std::size_t>(v[1])};
            } else fail("unknown source key '" + key + "'");
        } else {
            fail("key outside any section");
        }
    }

    if (mixing_rows.empty()) throw config_error(name + ": missing [mixing] section");
    cfg.mixing.resize(static_cast<Eigen::Index>(mixing_rows.size()),
                      static_cast<Eigen::Index>(mixing_rows.front().size()));
    for (std::size_t i = 0; i < mixing_rows.size(); ++i)
        for (std::size_t j = 0; j < mixing_rows.front().size(); ++j)
            cfg.mixing(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = mixing_rows[i][j];

    for (std::size_t i = 0; i < cfg.sources.size(); ++i)
        if (cfg.sources[i].name.empty()) cfg.sources[i].name = "s" + std::to_string(i);

    cfg.validate();
    return cfg;
}

inline ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open scenario file " + path);
    return parse_scenario(in, path);
}

} // namespace peaksharp
