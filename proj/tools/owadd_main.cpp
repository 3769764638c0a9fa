#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "owadd/harness.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitDataError = 2;
constexpr int kExitMethodFailure = 3;

nlohmann::json load_json_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw owadd::StreamIoError("cannot open " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw owadd::StreamIoError(path.string() + " is not valid JSON: " + e.what());
    }
    return j;
}

nlohmann::json parse_params(const std::string& params) {
    if (params.empty()) return nlohmann::json::object();
    // inline JSON or a path to a JSON file
    if (!params.empty() && (params.front() == '{' || params.front() == '[')) {
        try {
            return nlohmann::json::parse(params);
        } catch (const nlohmann::json::exception& e) {
            throw owadd::StreamIoError(std::string("--params is not valid JSON: ") + e.what());
        }
    }
    return load_json_file(params);
}

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct GenerateArgs {
    std::string spec_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
};

struct DetectArgs {
    std::vector<std::string> streams;
    std::string manifest;
    std::string method = "owadd";
    std::string params;
    std::string out_dir = "owadd-out";
    int jobs = 1;
    std::optional<double> auto_confirm_fraction;
    int auto_confirm_chunks = 3;
};

struct EvaluateArgs {
    std::string manifest;
    std::string out_dir = "owadd-out";
    std::string r_variant = "normalized";
};

struct ReportArgs {
    std::string stream;
    std::string params;
    std::string out_dir = "owadd-report";
    std::vector<int> chunks;
    int grid_points = 512;
};

int run_generate(const GenerateArgs& args) {
    const nlohmann::json spec_json = load_json_file(args.spec_path);
    owadd::ExperimentSpec spec = owadd::parse_experiment_spec(spec_json, args.seed);
    const fs::path out = args.out_dir.empty() ? fs::path(spec.output_dir) : fs::path(args.out_dir);
    owadd::cmd_generate(spec, out);
    std::cout << "generated " << spec.jobs.size() << " stream(s) under " << out.string() << "\n";
    return 0;
}

int run_detect(const DetectArgs& args) {
    owadd::MethodSpec method{args.method, parse_params(args.params)};
    std::optional<owadd::AutoConfirmPolicy> auto_confirm;
    if (args.auto_confirm_fraction) {
        auto_confirm = owadd::AutoConfirmPolicy{*args.auto_confirm_fraction,
                                                args.auto_confirm_chunks};
    }
    if (!args.manifest.empty()) {
        owadd::cmd_detect(args.manifest, method, args.out_dir, auto_confirm, args.jobs);
    } else {
        std::vector<fs::path> files(args.streams.begin(), args.streams.end());
        owadd::cmd_detect_files(files, method, args.out_dir, auto_confirm, args.jobs);
    }
    std::cout << "verdicts written under " << args.out_dir << "/verdicts/" << args.method << "\n";
    return 0;
}

int run_evaluate(const EvaluateArgs& args) {
    const owadd::RMeasureVariant variant = args.r_variant == "raw_difference"
                                               ? owadd::RMeasureVariant::raw_difference
                                               : owadd::RMeasureVariant::normalized;
    owadd::cmd_evaluate(args.manifest, args.out_dir, variant);
    std::cout << "reports written under " << args.out_dir << "/reports, summary.csv, ranks.csv\n";
    return 0;
}

int run_report(const ReportArgs& args) {
    const owadd::LoadedStream loaded = owadd::read_stream(args.stream);
    nlohmann::json params = parse_params(args.params);
    if (!params.contains("seed")) params["seed"] = loaded.config.seed;
    const owadd::DetectorConfig config = owadd::detector_config_from_json(params);

    fs::create_directories(args.out_dir);
    owadd::Detector detector(loaded.stream.chunks.front(), config);

    std::vector<bool> selected(loaded.stream.chunks.size(), args.chunks.empty());
    for (int c : args.chunks) {
        if (c >= 0 && static_cast<std::size_t>(c) < selected.size()) selected[static_cast<std::size_t>(c)] = true;
    }

    std::ofstream errors(fs::path(args.out_dir) / "errors.csv");
    errors << "chunk,row,error,density,known\n";
    owadd::RunResult result;
    result.method = "owadd";
    result.resolved_config = owadd::detector_config_to_json(config);

    auto emit_chunk = [&](std::size_t n, const owadd::ChunkVerdict& verdict) {
        owadd::VerdictRow row;
        row.chunk = static_cast<int>(verdict.chunk_index);
        row.drift = verdict.drift;
        row.positive_test_count = verdict.positive_test_count;
        row.unknown_count = verdict.unknown_count();
        row.mean_reference_error = verdict.mean_reference_error;
        row.mean_current_error = verdict.mean_current_error;
        result.verdicts.push_back(row);
        result.labels_known.push_back(verdict.labels_known);
        if (!selected[n]) return;
        const Eigen::VectorXd e = detector.known_class_errors(loaded.stream.chunks[n]);
        const std::vector<double> scores = owadd::kde_score(
            *detector.kde(), std::span<const double>(e.data(), static_cast<std::size_t>(e.size())));
        for (Eigen::Index i = 0; i < e.size(); ++i) {
            errors << n << ',' << i << ',' << fmt_double(e(i)) << ','
                   << fmt_double(scores[static_cast<std::size_t>(i)]) << ','
                   << (verdict.labels_known[static_cast<std::size_t>(i)] ? 1 : 0) << '\n';
        }
    };

    emit_chunk(0, detector.initial_verdict());
    for (std::size_t n = 1; n < loaded.stream.chunks.size(); ++n) {
        emit_chunk(n, detector.process_chunk(loaded.stream.chunks[n]));
    }

    // density curve of the final fitted estimator over a padded support grid
    const owadd::KdeModel& kde = *detector.kde();
    const auto [lo_it, hi_it] =
        std::minmax_element(kde.support_points.begin(), kde.support_points.end());
    const double lo = *lo_it - 5.0 * kde.bandwidth;
    const double hi = *hi_it + 5.0 * kde.bandwidth;
    std::ofstream curve(fs::path(args.out_dir) / "kde.csv");
    curve << "x,density\n";
    for (int i = 0; i < args.grid_points; ++i) {
        const double x = lo + (hi - lo) * i / (args.grid_points - 1);
        curve << fmt_double(x) << ',' << fmt_double(owadd::kde_score_one(kde, x)) << '\n';
    }

    owadd::write_verdicts_csv(result, fs::path(args.out_dir) / "verdicts.csv");
    std::cout << "report written under " << args.out_dir << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"OWADD: autoencoder drift detection and novelty recognition harness"};
    app.require_subcommand(1);

    GenerateArgs gen_args;
    auto* gen = app.add_subcommand("generate", "Generate a stream corpus from an experiment spec");
    gen->add_option("--spec", gen_args.spec_path, "Experiment spec JSON file")
        ->required()
        ->check(CLI::ExistingFile);
    gen->add_option("--out", gen_args.out_dir, "Output directory (overrides the spec)");
    gen->add_option("--seed", gen_args.seed, "Base seed override for all stream entries");

    DetectArgs det_args;
    auto* det = app.add_subcommand("detect", "Run a detector over generated streams");
    det->add_option("streams", det_args.streams, "Stream files (.owst)");
    det->add_option("--manifest", det_args.manifest, "Manifest written by generate");
    det->add_option("--method", det_args.method, "Detection method")
        ->check(CLI::IsMember({"owadd", "ksdd", "centroid"}));
    det->add_option("--params", det_args.params, "Method parameters: inline JSON or a JSON file");
    det->add_option("--out", det_args.out_dir, "Output directory");
    det->add_option("--jobs", det_args.jobs, "Streams processed concurrently")
        ->check(CLI::PositiveNumber);
    det->add_option("--auto-confirm-fraction", det_args.auto_confirm_fraction,
                    "Enable auto-confirm when the unknown fraction exceeds this value");
    det->add_option("--auto-confirm-chunks", det_args.auto_confirm_chunks,
                    "Consecutive chunks above the fraction before confirming");

    EvaluateArgs eval_args;
    auto* eval = app.add_subcommand("evaluate", "Score detection runs against ground truth");
    eval->add_option("--manifest", eval_args.manifest, "Manifest written by generate")
        ->required();
    eval->add_option("--out", eval_args.out_dir, "Directory holding detect outputs");
    eval->add_option("--r-variant", eval_args.r_variant, "R measure variant")
        ->check(CLI::IsMember({"normalized", "raw_difference"}));

    ReportArgs rep_args;
    auto* rep = app.add_subcommand("report", "Dump detector internals for plotting");
    rep->add_option("--stream", rep_args.stream, "Stream file (.owst)")
        ->required()
        ->check(CLI::ExistingFile);
    rep->add_option("--params", rep_args.params, "Detector parameters (inline JSON or file)");
    rep->add_option("--out", rep_args.out_dir, "Output directory");
    rep->add_option("--chunks", rep_args.chunks, "Chunk indices to dump (default: all)");
    rep->add_option("--grid", rep_args.grid_points, "KDE curve grid resolution")
        ->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (gen->parsed()) return run_generate(gen_args);
        if (det->parsed()) {
            if (det_args.manifest.empty() && det_args.streams.empty()) {
                std::cerr << "detect: provide stream files or --manifest\n";
                return kExitUsage;
            }
            return run_detect(det_args);
        }
        if (eval->parsed()) return run_evaluate(eval_args);
        if (rep->parsed()) return run_report(rep_args);
    } catch (const owadd::TrainingDivergence& e) {
        std::cerr << "method failure: " << e.what() << "\n";
        return kExitMethodFailure;
    } catch (const owadd::StreamIoError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitDataError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitDataError;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitDataError;
    } catch (const std::exception& e) {
        std::cerr << "method failure: " << e.what() << "\n";
        return kExitMethodFailure;
    }
    return 0;
}
