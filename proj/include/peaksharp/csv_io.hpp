#pragma once

#include <Eigen/Dense>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "peaksharp/errors.hpp"
#include "peaksharp/signal.hpp"
#include "peaksharp/vca.hpp"

namespace peaksharp {

/// Shortest representation that round-trips a double exactly.
inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline double parse_double(const std::string& text, const std::string& context) {
    const char* begin = text.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) throw data_error(context + ": not a number: '" + text + "'");
    return v;
}

struct SpectraFile {
    std::vector<std::string> labels;
    DataMatrix data;
};

/// Row-per-signal CSV: a leading `# origin=<v> dx=<v>` comment carries the
/// axis metadata, each following line is `label,v1,...,vp`.
inline void write_spectra(const std::string& path, const std::vector<std::string>& labels,
                          const Eigen::MatrixXd& rows, double dx, double origin) {
    if (labels.size() != static_cast<std::size_t>(rows.rows()))
        throw data_error("write_spectra: label count does not match rows");
    std::ofstream out(path);
    if (!out) throw data_error("write_spectra: cannot open " + path);
    out << "# origin=" << format_double(origin) << " dx=" << format_double(dx) << "\n";
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
        out << labels[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < rows.cols(); ++j) out << ',' << format_double(rows(i, j));
        out << '\n';
    }
    if (!out) throw data_error("write_spectra: write failed for " + path);
}

inline void write_spectra(const std::string& path, const std::string& label_prefix,
                          const std::vector<Spectrum>& spectra) {
    if (spectra.empty()) throw data_error("write_spectra: nothing to write");
    Eigen::MatrixXd rows(static_cast<Eigen::Index>(spectra.size()),
                         static_cast<Eigen::Index>(spectra.front().size()));
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < spectra.size(); ++i) {
        if (spectra[i].size() != spectra.front().size())
            throw data_error("write_spectra: row lengths differ");
        labels.push_back(label_prefix + "_" + std::to_string(i));
        for (std::size_t j = 0; j < spectra[i].size(); ++j)
            rows(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = spectra[i].values[j];
    }
    write_spectra(path, labels, rows, spectra.front().dx, spectra.front().origin);
}

inline SpectraFile read_spectra(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("read_spectra: cannot open " + path);
    SpectraFile out;
    out.data.dx = 1.0;
    out.data.origin = 0.0;
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream meta(line.substr(1));
            std::string token;
            while (meta >> token) {
                const auto eq = token.find('=');
                if (eq == std::string::npos) continue;
                const std::string key = token.substr(0, eq);
                const std::string value = token.substr(eq + 1);
                if (key == "origin") out.data.origin = parse_double(value, path);
                else if (key == "dx") out.data.dx = parse_double(value, path);
            }
            continue;
        }
        std::istringstream fields(line);
        std::string cell;
        if (!std::getline(fields, cell, ',')) continue;
        out.labels.push_back(cell);
        std::vector<double> row;
        while (std::getline(fields, cell, ','))
            row.push_back(parse_double(cell, path + ":" + std::to_string(lineno)));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw data_error("read_spectra: no data rows in " + path);
    const std::size_t p = rows.front().size();
    out.data.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(p));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != p)
            throw data_error("read_spectra: ragged rows in " + path);
        for (std::size_t j = 0; j < p; ++j)
            out.data.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
    return out;
}

inline void write_matrix(const std::string& path, const Eigen::MatrixXd& M,
                         const std::string& label_prefix = "row") {
    std::ofstream out(path);
    if (!out) throw data_error("write_matrix: cannot open " + path);
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        out << label_prefix << '_' << i;
        for (Eigen::Index j = 0; j < M.cols(); ++j) out << ',' << format_double(M(i, j));
        out << '\n';
    }
    if (!out) throw data_error("write_matrix: write failed for " + path);
}

inline Eigen::MatrixXd read_matrix(const std::string& path) {
    const SpectraFile f = read_spectra(path);
    return f.data.values;
}

inline void write_scores(const std::string& path, const ColumnScores& scores) {
    std::ofstream out(path);
    if (!out) throw data_error("write_scores: cannot open " + path);
    out << "column,score\n";
    for (std::size_t i = 0; i < scores.scores.size(); ++i)
        out << scores.kept_indices[i] << ',' << format_double(scores.scores[i]) << '\n';
    if (!out) throw data_error("write_scores: write failed for " + path);
}

/// Line-based `key = value` metadata files.
inline void write_meta(const std::string& path,
                       const std::vector<std::pair<std::string, std::string>>& entries) {
    std::ofstream out(path);
    if (!out) throw data_error("write_meta: cannot open " + path);
    for (const auto& [key, value] : entries) out << key << " = " << value << '\n';
    if (!out) throw data_error("write_meta: write failed for " + path);
}

inline std::vector<std::pair<std::string, std::string>> read_meta(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("read_meta: cannot open " + path);
    std::vector<std::pair<std::string, std::string>> entries;
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find(" = ");
        if (eq == std::string::npos) continue;
        entries.emplace_back(line.substr(0, eq), line.substr(eq + 3));
    }
    return entries;
}

} // namespace peaksharp
