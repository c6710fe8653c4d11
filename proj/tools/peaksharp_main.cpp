// peaksharp: command-line pipeline for blind separation of nonnegative
// spectral mixtures. Subcommands: synth, sharpen, unmix, eval, sweep.
//
// Exit codes: 0 ok, 2 configuration error, 3 data error, 4 numerical error.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "peaksharp/peaksharp.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace peaksharp;

namespace {

struct WeightSpec {
    enum class Mode { Off, Auto, Fixed } mode = Mode::Auto;
    double fraction = 1.0;  // for Auto
    double value = 0.0;     // for Fixed
};

WeightSpec parse_weight_spec(const std::string& text) {
    WeightSpec spec;
    if (text == "off") {
        spec.mode = WeightSpec::Mode::Off;
        return spec;
    }
    if (text.rfind("auto", 0) == 0) {
        spec.mode = WeightSpec::Mode::Auto;
        if (text.size() > 4) {
            if (text[4] != ':') throw config_error("--k: expected auto[:fraction], got '" + text + "'");
            spec.fraction = parse_double(text.substr(5), "--k fraction");
            if (!(spec.fraction > 0.0 && spec.fraction <= 1.0))
                throw config_error("--k: fraction must be in (0,1]");
        }
        return spec;
    }
    spec.mode = WeightSpec::Mode::Fixed;
    spec.value = parse_double(text, "--k");
    if (!(spec.value > 0.0)) throw config_error("--k: fixed weight must be positive");
    return spec;
}

/// Narrowest half-width over all mixture rows. Rows without a detectable peak
/// are skipped; failing every row is a data error.
std::optional<PeakEstimate> narrowest_peak(const DataMatrix& X, double prominence) {
    std::optional<PeakEstimate> best;
    for (Eigen::Index i = 0; i < X.mixtures(); ++i) {
        try {
            const PeakEstimate est = estimate_min_hwhm(X.row(i), prominence);
            if (!best || est.hwhm_axis < best->hwhm_axis) best = est;
        } catch (const data_error&) {
            continue;
        }
    }
    return best;
}

struct ResolvedWeight {
    double k = 0.0;
    std::optional<double> w_estimate;
    std::string mode;
    double fraction = 1.0;
};

ResolvedWeight resolve_weight(const WeightSpec& spec, const DataMatrix& X, double prominence) {
    ResolvedWeight r;
    switch (spec.mode) {
        case WeightSpec::Mode::Off:
            r.mode = "off";
            return r;
        case WeightSpec::Mode::Fixed: {
            r.mode = "fixed";
            r.k = spec.value;
            const auto est = narrowest_peak(X, prominence);
            if (est) r.w_estimate = est->hwhm_axis;
            return r;
        }
        case WeightSpec::Mode::Auto: {
            r.mode = "auto";
            r.fraction = spec.fraction;
            const auto est = narrowest_peak(X, prominence);
            if (!est) throw data_error("auto weight: no peak detected in any mixture row");
            r.w_estimate = est->hwhm_axis;
            r.k = suggest_weight(est->hwhm_axis, spec.fraction);
            return r;
        }
    }
    return r;
}

std::string csv_path(const std::string& input, const std::string& filename) {
    fs::path p(input);
    if (fs::is_directory(p)) p /= filename;
    if (!fs::exists(p)) throw data_error("missing input file " + p.string());
    return p.string();
}

void ensure_out_dir(const std::string& out) {
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) throw data_error("cannot create output directory " + out + ": " + ec.message());
}

std::vector<Spectrum> matrix_rows(const DataMatrix& X) {
    std::vector<Spectrum> rows;
    for (Eigen::Index i = 0; i < X.mixtures(); ++i) rows.push_back(X.row(i));
    return rows;
}

// ---------------------------------------------------------------- synth ----

struct SynthArgs {
    std::string input, out;
    std::optional<std::uint64_t> seed;
    std::optional<double> snr_db;
};

void run_synth(const SynthArgs& args) {
    ScenarioConfig cfg = load_scenario(args.input);
    if (args.seed) cfg.seed = *args.seed;
    if (args.snr_db) cfg.snr_db = std::isinf(*args.snr_db) ? std::optional<double>() : args.snr_db;

    const std::vector<Spectrum> sources = synth_sources(cfg);
    DataMatrix X = mix(cfg.mixing, sources);
    if (cfg.snr_db) X = add_noise(X, *cfg.snr_db, cfg.seed);

    ensure_out_dir(args.out);
    const fs::path out(args.out);
    write_spectra((out / "sources.csv").string(), "source", sources);
    write_spectra((out / "mixtures.csv").string(), "mixture", matrix_rows(X));
    write_matrix((out / "mixing_true.csv").string(), cfg.mixing);
    write_meta((out / "scenario.meta").string(),
               {{"scenario", args.input},
                {"condition", cfg.condition == Condition::Sap ? "sap" : "dps"},
                {"sources", std::to_string(cfg.sources.size())},
                {"mixtures", std::to_string(cfg.mixing.rows())},
                {"samples", std::to_string(cfg.grid.samples)},
                {"dx", format_double(cfg.grid.dx)},
                {"origin", format_double(cfg.grid.origin)},
                {"epsilon", format_double(cfg.epsilon_level)},
                {"snr_db", cfg.snr_db ? format_double(*cfg.snr_db) : "inf"},
                {"seed", std::to_string(cfg.seed)}});
}

// -------------------------------------------------------------- sharpen ----

struct SharpenArgs {
    std::string input, out;
    std::string weight = "auto";
    double prominence = 0.1;
};

void run_sharpen(const SharpenArgs& args) {
    const SpectraFile mixtures = read_spectra(csv_path(args.input, "mixtures.csv"));
    const WeightSpec spec = parse_weight_spec(args.weight);
    const ResolvedWeight weight = resolve_weight(spec, mixtures.data, args.prominence);

    std::vector<std::pair<std::string, std::string>> meta{
        {"mode", weight.mode},
        {"k", format_double(weight.k)},
        {"fraction", format_double(weight.fraction)},
        {"w_estimate", weight.w_estimate ? format_double(*weight.w_estimate) : "none"},
    };

    Eigen::MatrixXd sharp = mixtures.data.values;
    std::size_t clamped = 0;
    if (weight.k > 0.0) {
        for (Eigen::Index i = 0; i < sharp.rows(); ++i) {
            const Spectrum row = sharpen(mixtures.data.row(i), weight.k, /*clamp_negative=*/false);
            for (Eigen::Index j = 0; j < sharp.cols(); ++j) {
                double v = row.values[static_cast<std::size_t>(j)];
                if (v < 0.0) {
                    v = 0.0;
                    ++clamped;
                }
                sharp(i, j) = v;
            }
        }
    }
    meta.emplace_back("clamped_samples", std::to_string(clamped));
    if (weight.w_estimate && weight.k > max_safe_weight(*weight.w_estimate))
        meta.emplace_back("warning", "k=" + format_double(weight.k) + " exceeds nonnegativity bound " +
                                         format_double(max_safe_weight(*weight.w_estimate)) +
                                         " for estimated hwhm " + format_double(*weight.w_estimate));

    ensure_out_dir(args.out);
    const fs::path out(args.out);
    write_spectra((out / "mixtures_sharp.csv").string(), mixtures.labels, sharp, mixtures.data.dx,
                  mixtures.data.origin);
    write_meta((out / "sharpen.meta").string(), meta);
}

// ---------------------------------------------------------------- unmix ----

struct UnmixArgs {
    std::string input, out;
    int n = 0;
    std::string mode = "nn";
    std::string weight = "auto";
    double prominence = 0.1;
    double drop_tol = 1e-6;
    double min_angle_deg = 2.0;
    double exclude_angle_deg = 0.0;
    std::string recovery = "auto";
    double mu = 0.0;
};

RecoveryMode parse_recovery(const std::string& text) {
    if (text == "auto") return RecoveryMode::Auto;
    if (text == "nnls") return RecoveryMode::Nnls;
    if (text == "l1") return RecoveryMode::L1;
    if (text == "pinv") return RecoveryMode::Pinv;
    throw config_error("--recovery: expected auto|nnls|l1|pinv");
}

void run_unmix(const UnmixArgs& args) {
    if (args.mode != "nn" && args.mode != "nnp") throw config_error("--mode: expected nn or nnp");
    const SpectraFile mixtures = read_spectra(csv_path(args.input, "mixtures.csv"));

    EstimateOptions opts;
    opts.drop_tol = args.drop_tol;
    opts.min_angle_deg = args.min_angle_deg;
    opts.exclude_angle_deg = args.exclude_angle_deg;

    ResolvedWeight weight;
    if (args.mode == "nnp") {
        const WeightSpec spec = parse_weight_spec(args.weight);
        if (spec.mode == WeightSpec::Mode::Off)
            throw config_error("--mode nnp requires a sharpening weight (--k auto or a value)");
        weight = resolve_weight(spec, mixtures.data, args.prominence);
        opts.sharpen_k = weight.k;
    }

    const EstimateResult est = estimate_mixing(mixtures.data, args.n, opts);
    // Recovery always runs against the original mixtures; sharpened data only
    // ever feeds the estimation of the mixing matrix.
    const std::vector<Spectrum> sources =
        recover_sources(mixtures.data, est.mixing, parse_recovery(args.recovery), args.mu);

    ensure_out_dir(args.out);
    const fs::path out(args.out);
    write_matrix((out / "mixing_est.csv").string(), est.mixing.columns);
    write_spectra((out / "sources_est.csv").string(), "source", sources);
    write_scores((out / "scores.csv").string(), est.scores);

    std::string picked;
    for (const Eigen::Index idx : est.mixing.column_indices) {
        if (!picked.empty()) picked += ' ';
        picked += std::to_string(idx);
    }
    write_meta((out / "report.meta").string(),
               {{"method", args.mode},
                {"k", format_double(opts.sharpen_k)},
                {"weight_mode", args.mode == "nnp" ? weight.mode : "off"},
                {"w_estimate", weight.w_estimate ? format_double(*weight.w_estimate) : "none"},
                {"n", std::to_string(args.n)},
                {"drop_tol", format_double(args.drop_tol)},
                {"min_angle_deg", format_double(args.min_angle_deg)},
                {"exclude_angle_deg", format_double(args.exclude_angle_deg)},
                {"recovery", args.recovery},
                {"selected_columns", picked}});
}

// ----------------------------------------------------------------- eval ----

struct EvalArgs {
    std::string input, truth, out;
};

void run_eval(const EvalArgs& args) {
    const std::string truth_dir = args.truth.empty() ? args.input : args.truth;
    const Eigen::MatrixXd Ahat = read_matrix(csv_path(args.input, "mixing_est.csv"));
    const Eigen::MatrixXd Atrue = read_matrix(csv_path(truth_dir, "mixing_true.csv"));
    const SpectraFile est_sources = read_spectra(csv_path(args.input, "sources_est.csv"));
    const SpectraFile true_sources = read_spectra(csv_path(truth_dir, "sources.csv"));

    MetricBundle bundle = evaluate_mixing(Atrue, Ahat);
    if (true_sources.data.values.rows() != est_sources.data.values.rows())
        throw data_error("eval: source counts differ between estimate and truth");
    for (std::size_t i = 0; i < bundle.column_assignment.size(); ++i) {
        const Eigen::Index j = bundle.column_assignment[i];
        bundle.per_source_cosine.push_back(
            cosine_similarity(true_sources.data.row(static_cast<Eigen::Index>(i)),
                              est_sources.data.row(j)));
    }

    json report;
    report["comon_index"] = bundle.comon;
    report["column_assignment"] = bundle.column_assignment;
    report["mixing_cosines"] = bundle.mixing_cosines;
    report["per_source_cosine"] = bundle.per_source_cosine;

    ensure_out_dir(args.out);
    std::ofstream out(fs::path(args.out) / "metrics.json");
    if (!out) throw data_error("eval: cannot write metrics.json");
    out << report.dump(2) << '\n';
}

// ---------------------------------------------------------------- sweep ----

struct SweepArgs {
    std::string input, out;
    int n = 0;
    std::string param = "k";  // k | snr
    double from = 5.0, to = 100.0, step = 5.0;
    std::string weight = "auto";
    double prominence = 0.1;
    double drop_tol = 1e-6;
    double min_angle_deg = 2.0;
    double exclude_angle_deg = 0.0;
    std::optional<std::uint64_t> seed;
};

void run_sweep(const SweepArgs& args) {
    if (args.param != "k" && args.param != "snr") throw config_error("--sweep: expected k or snr");
    if (!(args.step > 0.0)) throw config_error("--step must be positive");
    if (args.to < args.from) throw config_error("--to must not be below --from");

    ScenarioConfig cfg = load_scenario(args.input);
    if (args.seed) cfg.seed = *args.seed;
    const std::vector<Spectrum> sources = synth_sources(cfg);
    const DataMatrix clean = mix(cfg.mixing, sources);

    EstimateOptions base;
    base.drop_tol = args.drop_tol;
    base.min_angle_deg = args.min_angle_deg;
    base.exclude_angle_deg = args.exclude_angle_deg;

    ensure_out_dir(args.out);
    std::ofstream csv(fs::path(args.out) / "sweep.csv");
    if (!csv) throw data_error("sweep: cannot write sweep.csv");
    csv << (args.param == "k" ? "k" : "snr_db") << ",comon_nn,comon_nnp\n";

    std::vector<std::string> warnings;
    std::size_t points = 0;

    if (args.param == "k") {
        DataMatrix X = clean;
        if (cfg.snr_db) X = add_noise(X, *cfg.snr_db, cfg.seed);
        const auto est_w = narrowest_peak(X, args.prominence);
        const EstimateResult nn = estimate_mixing(X, args.n, base);
        const double comon_nn = comon_index(cfg.mixing, nn.mixing.columns);
        for (double k = args.from; k <= args.to + 1e-12; k += args.step) {
            ++points;
            EstimateOptions opts = base;
            opts.sharpen_k = k;
            if (est_w && k > max_safe_weight(est_w->hwhm_axis))
                warnings.push_back("k=" + format_double(k) + " exceeds nonnegativity bound " +
                                   format_double(max_safe_weight(est_w->hwhm_axis)));
            const EstimateResult nnp = estimate_mixing(X, args.n, opts);
            csv << format_double(k) << ',' << format_double(comon_nn) << ','
                << format_double(comon_index(cfg.mixing, nnp.mixing.columns)) << '\n';
        }
    } else {
        const WeightSpec spec = parse_weight_spec(args.weight);
        std::size_t index = 0;
        for (double snr = args.from; snr <= args.to + 1e-12; snr += args.step, ++index) {
            ++points;
            const DataMatrix X = add_noise(clean, snr, cfg.seed + index);
            const EstimateResult nn = estimate_mixing(X, args.n, base);
            EstimateOptions opts = base;
            const ResolvedWeight weight = resolve_weight(spec, X, args.prominence);
            if (weight.k <= 0.0) throw config_error("snr sweep needs a sharpening weight for NNP");
            opts.sharpen_k = weight.k;
            if (weight.w_estimate && weight.k > max_safe_weight(*weight.w_estimate))
                warnings.push_back("snr=" + format_double(snr) + ": k=" + format_double(weight.k) +
                                   " exceeds nonnegativity bound");
            const EstimateResult nnp = estimate_mixing(X, args.n, opts);
            csv << format_double(snr) << ',' << format_double(comon_index(cfg.mixing, nn.mixing.columns))
                << ',' << format_double(comon_index(cfg.mixing, nnp.mixing.columns)) << '\n';
        }
    }
    if (!csv) throw data_error("sweep: write failed");
    csv.close();

    std::vector<std::pair<std::string, std::string>> meta{
        {"sweep", args.param},
        {"points", std::to_string(points)},
        {"scenario", args.input},
        {"n", std::to_string(args.n)},
        {"warning_count", std::to_string(warnings.size())},
    };
    for (std::size_t i = 0; i < warnings.size(); ++i)
        meta.emplace_back("warning_" + std::to_string(i), warnings[i]);
    write_meta((fs::path(args.out) / "sweep.meta").string(), meta);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Blind source separation of nonnegative spectra with Lorentzian peak sharpening"};
    app.require_subcommand(1);

    SynthArgs synth_args;
    double synth_snr = std::numeric_limits<double>::quiet_NaN();
    std::int64_t synth_seed = -1;
    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic scenario");
    synth_cmd->add_option("--input", synth_args.input, "Scenario config file")->required();
    synth_cmd->add_option("--out", synth_args.out, "Output directory")->required();
    synth_cmd->add_option("--seed", synth_seed, "Override the scenario seed");
    synth_cmd->add_option("--snr-db", synth_snr, "Override the scenario SNR (dB, inf = none)");

    SharpenArgs sharpen_args;
    auto* sharpen_cmd = app.add_subcommand("sharpen", "Sharpen every mixture row");
    sharpen_cmd->add_option("--input", sharpen_args.input, "Directory or mixtures.csv")->required();
    sharpen_cmd->add_option("--out", sharpen_args.out, "Output directory")->required();
    sharpen_cmd->add_option("--k", sharpen_args.weight, "Weight: <real>, auto[:fraction], or off");
    sharpen_cmd->add_option("--prominence", sharpen_args.prominence,
                            "Peak detection threshold as a fraction of the maximum");

    UnmixArgs unmix_args;
    auto* unmix_cmd = app.add_subcommand("unmix", "Estimate the mixing matrix and recover sources");
    unmix_cmd->add_option("--input", unmix_args.input, "Directory or mixtures.csv")->required();
    unmix_cmd->add_option("--out", unmix_args.out, "Output directory")->required();
    unmix_cmd->add_option("--n", unmix_args.n, "Number of sources")->required();
    unmix_cmd->add_option("--mode", unmix_args.mode, "nn (raw) or nnp (sharpen first)");
    unmix_cmd->add_option("--k", unmix_args.weight, "NNP weight: <real>, auto[:fraction]");
    unmix_cmd->add_option("--prominence", unmix_args.prominence, "Auto-weight peak threshold");
    unmix_cmd->add_option("--drop-tol", unmix_args.drop_tol, "Relative column-norm drop threshold");
    unmix_cmd->add_option("--min-angle-deg", unmix_args.min_angle_deg, "Vertex separation angle");
    unmix_cmd->add_option("--exclude-angle-deg", unmix_args.exclude_angle_deg,
                          "Scoring-basis exclusion angle (0 = duplicates only)");
    unmix_cmd->add_option("--recovery", unmix_args.recovery, "auto|nnls|l1|pinv");
    unmix_cmd->add_option("--mu", unmix_args.mu, "l1 penalty (0 = per-column default)");

    EvalArgs eval_args;
    auto* eval_cmd = app.add_subcommand("eval", "Compare an estimate against ground truth");
    eval_cmd->add_option("--input", eval_args.input, "Directory with mixing_est/sources_est")->required();
    eval_cmd->add_option("--truth", eval_args.truth, "Directory with mixing_true/sources (default: input)");
    eval_cmd->add_option("--out", eval_args.out, "Output directory")->required();

    SweepArgs sweep_args;
    std::int64_t sweep_seed = -1;
    auto* sweep_cmd = app.add_subcommand("sweep", "Comon-index curve over k or SNR");
    sweep_cmd->add_option("--input", sweep_args.input, "Scenario config file")->required();
    sweep_cmd->add_option("--out", sweep_args.out, "Output directory")->required();
    sweep_cmd->add_option("--n", sweep_args.n, "Number of sources")->required();
    sweep_cmd->add_option("--sweep", sweep_args.param, "k or snr")->required();
    sweep_cmd->add_option("--from", sweep_args.from, "First sweep value")->required();
    sweep_cmd->add_option("--to", sweep_args.to, "Last sweep value")->required();
    sweep_cmd->add_option("--step", sweep_args.step, "Sweep increment")->required();
    sweep_cmd->add_option("--k", sweep_args.weight, "NNP weight for snr sweeps");
    sweep_cmd->add_option("--prominence", sweep_args.prominence, "Auto-weight peak threshold");
    sweep_cmd->add_option("--drop-tol", sweep_args.drop_tol, "Relative column-norm drop threshold");
    sweep_cmd->add_option("--min-angle-deg", sweep_args.min_angle_deg, "Vertex separation angle");
    sweep_cmd->add_option("--exclude-angle-deg", sweep_args.exclude_angle_deg,
                          "Scoring-basis exclusion angle");
    sweep_cmd->add_option("--seed", sweep_seed, "Override the scenario seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (synth_cmd->parsed()) {
            if (synth_seed >= 0) synth_args.seed = static_cast<std::uint64_t>(synth_seed);
            if (!std::isnan(synth_snr)) synth_args.snr_db = synth_snr;
            run_synth(synth_args);
        } else if (sharpen_cmd->parsed()) {
            run_sharpen(sharpen_args);
        } else if (unmix_cmd->parsed()) {
            run_unmix(unmix_args);
        } else if (eval_cmd->parsed()) {
            run_eval(eval_args);
        } else if (sweep_cmd->parsed()) {
            if (sweep_seed >= 0) sweep_args.seed = static_cast<std::uint64_t>(sweep_seed);
            run_sweep(sweep_args);
        }
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const data_error& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 3;
    } catch (const numerical_error& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
