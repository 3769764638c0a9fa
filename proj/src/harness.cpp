#include "owadd/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include "owadd/baselines.hpp"
#include "owadd/stats.hpp"

namespace owadd {

namespace {

namespace fs = std::filesystem;

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void require_keys(const nlohmann::json& j, const std::set<std::string>& allowed,
                  const std::string& what) {
    for (const auto& item : j.items()) {
        if (!allowed.contains(item.key())) {
            throw std::invalid_argument(what + ": unknown key '" + item.key() + "'");
        }
    }
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    return out;
}

} // namespace

DetectorConfig detector_config_from_json(const nlohmann::json& params) {
    require_keys(params,
                 {"replications", "sample_size", "drift_threshold", "novelty_threshold",
                  "buffer_capacity", "epochs", "significance", "hidden_widths",
                  "learning_rate", "batch_size", "optimizer", "loss", "seed"},
                 "detector params");
    if (params.contains("optimizer") && params.at("optimizer").get<std::string>() != "adam") {
        throw std::invalid_argument("detector params: the only supported optimizer is 'adam'");
    }
    DetectorConfig c;
    c.replications = params.value("replications", c.replications);
    c.sample_size = params.value("sample_size", c.sample_size);
    c.drift_threshold = params.value("drift_threshold", c.drift_threshold);
    c.novelty_threshold = params.value("novelty_threshold", c.novelty_threshold);
    c.buffer_capacity = params.value("buffer_capacity", c.buffer_capacity);
    c.epochs = params.value("epochs", c.epochs);
    c.significance = params.value("significance", c.significance);
    c.hidden_widths = params.value("hidden_widths", c.hidden_widths);
    c.learning_rate = params.value("learning_rate", c.learning_rate);
    c.batch_size = params.value("batch_size", c.batch_size);
    if (params.contains("loss")) {
        const std::string loss = params.at("loss").get<std::string>();
        if (loss == "mae") {
            c.loss = TrainLoss::mean_absolute_error;
        } else if (loss == "mse") {
            c.loss = TrainLoss::mean_squared_error;
        } else {
            throw std::invalid_argument("detector params: loss must be 'mae' or 'mse'");
        }
    }
    c.seed = params.value("seed", c.seed);
    c.validate();
    return c;
}

nlohmann::json detector_config_to_json(const DetectorConfig& c) {
    return {{"replications", c.replications},
            {"sample_size", c.sample_size},
            {"drift_threshold", c.drift_threshold},
            {"novelty_threshold", c.novelty_threshold},
            {"buffer_capacity", c.buffer_capacity},
            {"epochs", c.epochs},
            {"significance", c.significance},
            {"hidden_widths", c.hidden_widths},
            {"learning_rate", c.learning_rate},
            {"batch_size", c.batch_size},
            {"loss", c.loss == TrainLoss::mean_absolute_error ? "mae" : "mse"},
            {"seed", c.seed}};
}

StreamConfig stream_config_from_json(const nlohmann::json& j) {
    require_keys(j,
                 {"n_chunks", "chunk_size", "n_features", "n_known_classes", "n_drifts",
                  "n_novelties", "novel_proportion", "class_separation", "seed"},
                 "stream config");
    StreamConfig c;
    c.n_chunks = j.value("n_chunks", c.n_chunks);
    c.chunk_size = j.value("chunk_size", c.chunk_size);
    c.n_features = j.value("n_features", c.n_features);
    c.n_known_classes = j.value("n_known_classes", c.n_known_classes);
    c.n_drifts = j.value("n_drifts", c.n_drifts);
    c.n_novelties = j.value("n_novelties", c.n_novelties);
    c.novel_proportion = j.value("novel_proportion", c.novel_proportion);
    c.class_separation = j.value("class_separation", c.class_separation);
    c.seed = j.value("seed", c.seed);
    c.validate();
    return c;
}

nlohmann::json stream_config_to_json(const StreamConfig& c) {
    return {{"n_chunks", c.n_chunks},
            {"chunk_size", c.chunk_size},
            {"n_features", c.n_features},
            {"n_known_classes", c.n_known_classes},
            {"n_drifts", c.n_drifts},
            {"n_novelties", c.n_novelties},
            {"novel_proportion", c.novel_proportion},
            {"class_separation", c.class_separation},
            {"seed", c.seed}};
}

RunResult run_owadd(const Stream& stream, const DetectorConfig& config,
                    const std::optional<AutoConfirmPolicy>& auto_confirm) {
    if (stream.chunks.empty()) throw std::invalid_argument("run_owadd: empty stream");
    const auto start = std::chrono::steady_clock::now();

    RunResult result;
    result.method = "owadd";
    result.resolved_config = detector_config_to_json(config);
    if (auto_confirm) {
        result.resolved_config["auto_confirm"] = {
            {"unknown_fraction", auto_confirm->unknown_fraction},
            {"consecutive_chunks", auto_confirm->consecutive_chunks}};
    }

    Detector detector(stream.chunks.front(), config);
    int streak = 0;
    auto record = [&](const ChunkVerdict& verdict, const Eigen::MatrixXd& chunk) {
        VerdictRow row;
        row.chunk = static_cast<int>(verdict.chunk_index);
        row.drift = verdict.drift;
        row.positive_test_count = verdict.positive_test_count;
        row.unknown_count = verdict.unknown_count();
        row.mean_reference_error = verdict.mean_reference_error;
        row.mean_current_error = verdict.mean_current_error;
        result.verdicts.push_back(row);
        result.labels_known.push_back(verdict.labels_known);

        if (auto_confirm) {
            const double frac = static_cast<double>(verdict.unknown_count()) /
                                static_cast<double>(verdict.labels_known.size());
            if (frac > auto_confirm->unknown_fraction) {
                if (++streak >= auto_confirm->consecutive_chunks) {
                    detector.confirm_novelty(chunk);
                    streak = 0;
                }
            } else {
                streak = 0;
            }
        }
    };

    record(detector.initial_verdict(), stream.chunks.front());
    for (std::size_t n = 1; n < stream.chunks.size(); ++n) {
        record(detector.process_chunk(stream.chunks[n]), stream.chunks[n]);
    }

    result.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

RunResult run_ksdd(const Stream& stream, int window_size, double threshold) {
    if (stream.chunks.empty()) throw std::invalid_argument("run_ksdd: empty stream");
    const auto start = std::chrono::steady_clock::now();

    RunResult result;
    result.method = "ksdd";
    result.resolved_config = {{"window_size", window_size}, {"threshold", threshold}};

    KsddDetector detector(stream.chunks.front(), window_size, threshold);
    for (std::size_t n = 0; n < stream.chunks.size(); ++n) {
        VerdictRow row;
        row.chunk = static_cast<int>(n);
        // chunk 0 fills the reference window during construction
        row.drift = n == 0 ? false : detector.process_chunk(stream.chunks[n]);
        row.unknown_count = 0;
        result.verdicts.push_back(row);
        result.labels_known.emplace_back(static_cast<std::size_t>(stream.chunks[n].rows()), true);
    }

    result.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

RunResult run_centroid(const Stream& stream, int n_clusters, std::uint64_t seed) {
    if (stream.chunks.empty()) throw std::invalid_argument("run_centroid: empty stream");
    const auto start = std::chrono::steady_clock::now();

    RunResult result;
    result.method = "centroid";
    result.resolved_config = {{"n_clusters", n_clusters}, {"seed", seed}};

    CentroidNovelty model(stream.chunks.front(), n_clusters, seed);
    for (std::size_t n = 0; n < stream.chunks.size(); ++n) {
        const std::vector<bool> labels = model.labels(stream.chunks[n]);
        VerdictRow row;
        row.chunk = static_cast<int>(n);
        row.unknown_count = static_cast<std::size_t>(
            std::count(labels.begin(), labels.end(), false));
        result.verdicts.push_back(row);
        result.labels_known.push_back(labels);
    }

    result.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

RunResult run_method(const Stream& stream, const std::string& method,
                     const nlohmann::json& params, std::uint64_t stream_seed,
                     const std::optional<AutoConfirmPolicy>& auto_confirm) {
    if (method == "owadd") {
        nlohmann::json merged = params;
        if (!merged.contains("seed")) merged["seed"] = stream_seed;
        return run_owadd(stream, detector_config_from_json(merged), auto_confirm);
    }
    if (method == "ksdd") {
        require_keys(params, {"window_size", "threshold"}, "ksdd params");
        return run_ksdd(stream, params.value("window_size", 200),
                        params.value("threshold", 0.005));
    }
    if (method == "centroid") {
        require_keys(params, {"n_clusters", "seed"}, "centroid params");
        return run_centroid(stream,
                            params.value("n_clusters", stream.truth.n_known_classes),
                            params.value("seed", stream_seed));
    }
    throw std::invalid_argument("unknown method '" + method + "'");
}

void write_verdicts_csv(const RunResult& result, const std::filesystem::path& path) {
    std::ofstream out = open_out(path);
    out << "chunk,drift_flag,positive_test_count,unknown_count,mean_reference_error,"
           "mean_current_error\n";
    for (const VerdictRow& row : result.verdicts) {
        out << row.chunk << ',' << (row.drift ? 1 : 0) << ',' << row.positive_test_count
            << ',' << row.unknown_count << ',' << fmt_double(row.mean_reference_error)
            << ',' << fmt_double(row.mean_current_error) << '\n';
    }
}

void write_labels_csv(const RunResult& result, const std::filesystem::path& path) {
    std::ofstream out = open_out(path);
    out << "chunk,row,known\n";
    for (std::size_t n = 0; n < result.labels_known.size(); ++n) {
        const auto& labels = result.labels_known[n];
        for (std::size_t i = 0; i < labels.size(); ++i) {
            out << n << ',' << i << ',' << (labels[i] ? 1 : 0) << '\n';
        }
    }
}

std::vector<VerdictRow> read_verdicts_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path.string() + " is empty");
    std::vector<VerdictRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 6) {
            throw std::runtime_error(path.string() + ": malformed verdict row '" + line + "'");
        }
        VerdictRow row;
        row.chunk = std::stoi(fields[0]);
        row.drift = fields[1] == "1";
        row.positive_test_count = std::stoi(fields[2]);
        row.unknown_count = static_cast<std::size_t>(std::stoul(fields[3]));
        row.mean_reference_error = std::strtod(fields[4].c_str(), nullptr);
        row.mean_current_error = std::strtod(fields[5].c_str(), nullptr);
        rows.push_back(row);
    }
    return rows;
}

std::vector<std::vector<bool>> read_labels_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path.string() + " is empty");
    std::vector<std::vector<bool>> labels;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 3) {
            throw std::runtime_error(path.string() + ": malformed label row '" + line + "'");
        }
        const std::size_t chunk = static_cast<std::size_t>(std::stoul(fields[0]));
        if (chunk >= labels.size()) labels.resize(chunk + 1);
        labels[chunk].push_back(fields[2] == "1");
    }
    return labels;
}

MetricReport evaluate_run(const std::vector<VerdictRow>& verdicts,
                          const std::vector<std::vector<bool>>& predicted_known,
                          const GroundTruth& truth, RMeasureVariant r_variant) {
    if (predicted_known.size() != truth.class_ids.size()) {
        throw std::invalid_argument("evaluate_run: chunk count mismatch between labels and truth");
    }
    MetricReport report;
    report.n_chunks = static_cast<int>(verdicts.size());

    DetectionLog log;
    log.n_chunks = report.n_chunks;
    for (const VerdictRow& row : verdicts) {
        if (row.drift) log.detections.push_back(row.chunk);
    }
    report.n_detections = static_cast<int>(log.detections.size());

    const std::vector<int> events = truth.event_chunks();
    report.n_events = static_cast<int>(events.size());
    if (!events.empty()) {
        report.d1 = d1(log, events);
        report.d2 = d2(log, events);
        report.r = r_measure(log, events, r_variant);
    }

    report.classification = classification_metrics(predicted_known, truth.known_labels());
    return report;
}

nlohmann::json MetricReport::to_json() const {
    nlohmann::json j;
    j["n_chunks"] = n_chunks;
    j["n_detections"] = n_detections;
    j["n_events"] = n_events;
    j["d1"] = d1 ? nlohmann::json(*d1) : nlohmann::json(nullptr);
    j["d2"] = d2 ? nlohmann::json(*d2) : nlohmann::json(nullptr);
    j["r"] = r ? nlohmann::json(*r) : nlohmann::json(nullptr);
    j["recall"] = classification.recall;
    j["specificity"] = classification.specificity;
    j["balanced_accuracy"] = classification.balanced_accuracy;
    j["confusion"] = {{"tp", classification.counts.tp},
                      {"fn", classification.counts.fn},
                      {"tn", classification.counts.tn},
                      {"fp", classification.counts.fp}};
    return j;
}

void write_report_json(const MetricReport& report, const std::filesystem::path& path) {
    std::ofstream out = open_out(path);
    out << report.to_json().dump(2) << '\n';
}

void write_chunk_series_csv(const MetricReport& report,
                            const std::vector<VerdictRow>& verdicts,
                            const std::filesystem::path& path) {
    std::ofstream out = open_out(path);
    out << "chunk,drift_flag,recall,specificity,bac,unknown_fraction\n";
    for (std::size_t i = 0; i < report.classification.per_chunk.size(); ++i) {
        const ChunkMetricsRow& row = report.classification.per_chunk[i];
        const bool drift = i < verdicts.size() && verdicts[i].drift;
        out << row.chunk << ',' << (drift ? 1 : 0) << ',';
        if (row.recall) out << fmt_double(*row.recall);
        out << ',';
        if (row.specificity) out << fmt_double(*row.specificity);
        out << ',';
        if (row.balanced_accuracy) out << fmt_double(*row.balanced_accuracy);
        out << ',' << fmt_double(row.unknown_fraction) << '\n';
    }
}

ExperimentSpec parse_experiment_spec(const nlohmann::json& spec,
                                     std::optional<std::uint64_t> base_seed_override) {
    require_keys(spec, {"output_dir", "streams", "methods", "auto_confirm", "r_variant"},
                 "experiment spec");
    ExperimentSpec out;
    out.output_dir = spec.value("output_dir", out.output_dir);

    if (!spec.contains("streams") || !spec.at("streams").is_array() ||
        spec.at("streams").empty()) {
        throw std::invalid_argument("experiment spec: 'streams' must be a non-empty array");
    }
    for (const auto& sj : spec.at("streams")) {
        require_keys(sj, {"name", "replications", "base_seed", "config"}, "stream entry");
        const std::string name = sj.value("name", "stream");
        const int replications = sj.value("replications", 1);
        if (replications < 1) {
            throw std::invalid_argument("experiment spec: replications must be >= 1");
        }
        const std::uint64_t base_seed =
            base_seed_override.value_or(sj.value("base_seed", std::uint64_t{0}));
        const StreamConfig base = stream_config_from_json(sj.value("config", nlohmann::json::object()));
        for (int rep = 0; rep < replications; ++rep) {
            StreamJob job;
            job.name = name;
            job.replication = rep;
            job.config = base;
            job.config.seed = base_seed + static_cast<std::uint64_t>(rep);
            job.file = "streams/" + name + "_r" + std::to_string(rep) + ".owst";
            out.jobs.push_back(std::move(job));
        }
    }

    if (spec.contains("methods")) {
        for (const auto& mj : spec.at("methods")) {
            require_keys(mj, {"method", "params"}, "method entry");
            MethodSpec m;
            m.method = mj.at("method").get<std::string>();
            m.params = mj.value("params", nlohmann::json::object());
            out.methods.push_back(std::move(m));
        }
    }
    if (out.methods.empty()) out.methods.push_back({"owadd", nlohmann::json::object()});

    if (spec.contains("auto_confirm") && !spec.at("auto_confirm").is_null()) {
        const auto& aj = spec.at("auto_confirm");
        require_keys(aj, {"unknown_fraction", "consecutive_chunks"}, "auto_confirm");
        AutoConfirmPolicy policy;
        policy.unknown_fraction = aj.value("unknown_fraction", policy.unknown_fraction);
        policy.consecutive_chunks = aj.value("consecutive_chunks", policy.consecutive_chunks);
        out.auto_confirm = policy;
    }

    const std::string variant = spec.value("r_variant", "normalized");
    if (variant == "normalized") {
        out.r_variant = RMeasureVariant::normalized;
    } else if (variant == "raw_difference") {
        out.r_variant = RMeasureVariant::raw_difference;
    } else {
        throw std::invalid_argument("experiment spec: unknown r_variant '" + variant + "'");
    }
    return out;
}

void cmd_generate(const ExperimentSpec& spec, const std::filesystem::path& out_dir) {
    fs::create_directories(out_dir / "streams");
    nlohmann::json manifest;
    manifest["format"] = "owadd.manifest";
    manifest["version"] = 1;
    nlohmann::json streams = nlohmann::json::array();
    for (const StreamJob& job : spec.jobs) {
        const Stream stream = generate_stream(job.config);
        write_stream(stream, job.config, out_dir / job.file);
        streams.push_back({{"name", job.name},
                           {"replication", job.replication},
                           {"file", job.file},
                           {"config", stream_config_to_json(job.config)}});
    }
    manifest["streams"] = std::move(streams);
    std::ofstream out = open_out(out_dir / "manifest.json");
    out << manifest.dump(2) << '\n';
}

namespace {

struct ManifestEntry {
    std::string name;
    int replication;
    fs::path file;
    StreamConfig config;
};

std::vector<ManifestEntry> read_manifest(const fs::path& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) throw StreamIoError("cannot open manifest " + manifest_path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception&) {
        throw MalformedStreamFile("manifest is not valid JSON: " + manifest_path.string());
    }
    if (j.value("format", "") != "owadd.manifest" || j.value("version", 0) != 1) {
        throw MalformedStreamFile("unrecognized manifest format: " + manifest_path.string());
    }
    std::vector<ManifestEntry> entries;
    const fs::path base = manifest_path.parent_path();
    for (const auto& sj : j.at("streams")) {
        ManifestEntry e;
        e.name = sj.at("name").get<std::string>();
        e.replication = sj.at("replication").get<int>();
        e.file = base / sj.at("file").get<std::string>();
        e.config = stream_config_from_json(sj.at("config"));
        entries.push_back(std::move(e));
    }
    return entries;
}

std::string job_stem(const ManifestEntry& e) {
    return e.name + "_r" + std::to_string(e.replication);
}

} // namespace

namespace {

struct DetectJob {
    std::string stem;
    fs::path file;
};

void run_detect_jobs(const std::vector<DetectJob>& detect_jobs, const MethodSpec& method,
                     const fs::path& out_dir,
                     const std::optional<AutoConfirmPolicy>& auto_confirm, int jobs) {
    for (const DetectJob& job : detect_jobs) {
        if (!fs::exists(job.file)) {
            throw StreamIoError("stream file not found: " + job.file.string());
        }
    }
    fs::create_directories(out_dir / "verdicts" / method.method);
    fs::create_directories(out_dir / "labels" / method.method);
    fs::create_directories(out_dir / "runs" / method.method);

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto worker = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= detect_jobs.size()) return;
            {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (failure) return;
            }
            try {
                const DetectJob& job = detect_jobs[i];
                const LoadedStream loaded = read_stream(job.file);
                RunResult result = run_method(loaded.stream, method.method, method.params,
                                              loaded.config.seed, auto_confirm);
                write_verdicts_csv(result,
                                   out_dir / "verdicts" / method.method / (job.stem + ".csv"));
                write_labels_csv(result, out_dir / "labels" / method.method / (job.stem + ".csv"));

                nlohmann::json meta;
                meta["method"] = result.method;
                meta["stream"] = job.file.string();
                meta["config"] = result.resolved_config;
                meta["wall_seconds"] = result.wall_seconds;
                std::ofstream mo =
                    open_out(out_dir / "runs" / method.method / (job.stem + ".run.json"));
                mo << meta.dump(2) << '\n';
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                return;
            }
        }
    };

    const int n_workers =
        std::max(1, std::min<int>(jobs, static_cast<int>(detect_jobs.size())));
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(n_workers));
        for (int t = 0; t < n_workers; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);
}

} // namespace

void cmd_detect(const std::filesystem::path& manifest_path, const MethodSpec& method,
                const std::filesystem::path& out_dir,
                const std::optional<AutoConfirmPolicy>& auto_confirm, int jobs) {
    const std::vector<ManifestEntry> entries = read_manifest(manifest_path);
    std::vector<DetectJob> detect_jobs;
    detect_jobs.reserve(entries.size());
    for (const ManifestEntry& entry : entries) {
        detect_jobs.push_back({job_stem(entry), entry.file});
    }
    run_detect_jobs(detect_jobs, method, out_dir, auto_confirm, jobs);
}

void cmd_detect_files(const std::vector<std::filesystem::path>& stream_files,
                      const MethodSpec& method, const std::filesystem::path& out_dir,
                      const std::optional<AutoConfirmPolicy>& auto_confirm, int jobs) {
    std::vector<DetectJob> detect_jobs;
    detect_jobs.reserve(stream_files.size());
    for (const fs::path& file : stream_files) {
        detect_jobs.push_back({file.stem().string(), file});
    }
    run_detect_jobs(detect_jobs, method, out_dir, auto_confirm, jobs);
}

namespace {

struct Aggregate {
    std::vector<double> d1, d2, r, bac, recall, specificity;
};

void append_stat(std::ostream& out, std::span<const double> values) {
    if (values.empty()) {
        out << ",,";
        return;
    }
    out << ',' << fmt_double(mean(values)) << ','
        << fmt_double(std::sqrt(sample_variance(values)));
}

} // namespace

void cmd_evaluate(const std::filesystem::path& manifest_path,
                  const std::filesystem::path& out_dir, RMeasureVariant r_variant) {
    const std::vector<ManifestEntry> entries = read_manifest(manifest_path);

    std::vector<std::string> methods;
    const fs::path verdict_root = out_dir / "verdicts";
    if (!fs::is_directory(verdict_root)) {
        throw StreamIoError("no verdicts directory under " + out_dir.string() +
                            "; run detect first");
    }
    for (const auto& dir : fs::directory_iterator(verdict_root)) {
        if (dir.is_directory()) methods.push_back(dir.path().filename().string());
    }
    std::sort(methods.begin(), methods.end());
    if (methods.empty()) throw StreamIoError("no method runs found under " + verdict_root.string());

    std::map<std::pair<std::string, std::string>, Aggregate> by_config; // (name, method)
    for (const std::string& method : methods) {
        for (const ManifestEntry& entry : entries) {
            const std::string stem = job_stem(entry);
            const fs::path verdict_path = verdict_root / method / (stem + ".csv");
            if (!fs::exists(verdict_path)) continue;

            const std::vector<VerdictRow> verdicts = read_verdicts_csv(verdict_path);
            const std::vector<std::vector<bool>> labels =
                read_labels_csv(out_dir / "labels" / method / (stem + ".csv"));
            const GroundTruth truth = read_ground_truth(entry.file);

            const MetricReport report = evaluate_run(verdicts, labels, truth, r_variant);
            write_report_json(report,
                              out_dir / "reports" / method / (stem + ".report.json"));
            write_chunk_series_csv(report, verdicts,
                                   out_dir / "reports" / method / (stem + ".chunks.csv"));

            Aggregate& agg = by_config[{entry.name, method}];
            if (report.d1) agg.d1.push_back(*report.d1);
            if (report.d2) agg.d2.push_back(*report.d2);
            if (report.r) agg.r.push_back(*report.r);
            if (std::isfinite(report.classification.balanced_accuracy)) {
                agg.bac.push_back(report.classification.balanced_accuracy);
            }
            if (std::isfinite(report.classification.recall)) {
                agg.recall.push_back(report.classification.recall);
            }
            if (std::isfinite(report.classification.specificity)) {
                agg.specificity.push_back(report.classification.specificity);
            }
        }
    }
    if (by_config.empty()) {
        throw StreamIoError("no verdict files matched the manifest under " + out_dir.string());
    }

    std::ofstream summary = open_out(out_dir / "summary.csv");
    summary << "stream,method,n_runs,d1_mean,d1_std,d2_mean,d2_std,r_mean,r_std,"
               "bac_mean,bac_std,recall_mean,recall_std,specificity_mean,specificity_std\n";
    for (const auto& [key, agg] : by_config) {
        const std::size_t n_runs =
            std::max({agg.d1.size(), agg.bac.size(), agg.recall.size()});
        summary << key.first << ',' << key.second << ',' << n_runs;
        append_stat(summary, agg.d1);
        append_stat(summary, agg.d2);
        append_stat(summary, agg.r);
        append_stat(summary, agg.bac);
        append_stat(summary, agg.recall);
        append_stat(summary, agg.specificity);
        summary << '\n';
    }

    // per-(stream, measure) method ranks; lower is better for drift measures,
    // higher for classification measures
    std::ofstream ranks = open_out(out_dir / "ranks.csv");
    ranks << "stream,measure,method,mean,rank\n";
    std::set<std::string> names;
    for (const auto& [key, agg] : by_config) names.insert(key.first);
    struct Measure {
        const char* label;
        std::vector<double> Aggregate::*field;
        bool lower_is_better;
    };
    const Measure measures[] = {{"d1", &Aggregate::d1, true},
                                {"d2", &Aggregate::d2, true},
                                {"r", &Aggregate::r, true},
                                {"bac", &Aggregate::bac, false},
                                {"recall", &Aggregate::recall, false},
                                {"specificity", &Aggregate::specificity, false}};
    for (const std::string& name : names) {
        for (const Measure& measure : measures) {
            std::vector<std::pair<std::string, double>> scored;
            for (const std::string& method : methods) {
                const auto it = by_config.find({name, method});
                if (it == by_config.end()) continue;
                const std::vector<double>& values = it->second.*measure.field;
                if (!values.empty()) scored.emplace_back(method, mean(values));
            }
            if (scored.empty()) continue;
            std::vector<std::size_t> order(scored.size());
            std::iota(order.begin(), order.end(), std::size_t{0});
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return measure.lower_is_better ? scored[a].second < scored[b].second
                                               : scored[a].second > scored[b].second;
            });
            for (std::size_t pos = 0; pos < order.size(); ++pos) {
                const auto& [method, value] = scored[order[pos]];
                ranks << name << ',' << measure.label << ',' << method << ','
                      << fmt_double(value) << ',' << (pos + 1) << '\n';
            }
        }
    }
}

} // namespace owadd
