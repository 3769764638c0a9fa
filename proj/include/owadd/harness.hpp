#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "owadd/detector.hpp"
#include "owadd/evaluation.hpp"
#include "owadd/stream_io.hpp"
#include "owadd/streamgen.hpp"

namespace owadd {

/// Optional harness policy that calls confirm_novelty once the unknown
/// fraction stays above a threshold for a number of consecutive chunks.
/// Off by default so headline runs stay fully unsupervised.
struct AutoConfirmPolicy {
    double unknown_fraction = 0.5;
    int consecutive_chunks = 3;
};

struct VerdictRow {
    int chunk = 0;
    bool drift = false;
    int positive_test_count = 0;
    std::size_t unknown_count = 0;
    double mean_reference_error = std::numeric_limits<double>::quiet_NaN();
    double mean_current_error = std::numeric_limits<double>::quiet_NaN();
};

struct RunResult {
    std::string method;
    std::vector<VerdictRow> verdicts;               // one row per chunk
    std::vector<std::vector<bool>> labels_known;    // per chunk, per row
    double wall_seconds = 0.0;
    nlohmann::json resolved_config;
};

DetectorConfig detector_config_from_json(const nlohmann::json& params);
nlohmann::json detector_config_to_json(const DetectorConfig& config);
StreamConfig stream_config_from_json(const nlohmann::json& j);
nlohmann::json stream_config_to_json(const StreamConfig& config);

RunResult run_owadd(const Stream& stream, const DetectorConfig& config,
                    const std::optional<AutoConfirmPolicy>& auto_confirm = {});
RunResult run_ksdd(const Stream& stream, int window_size = 200, double threshold = 0.005);
RunResult run_centroid(const Stream& stream, int n_clusters, std::uint64_t seed);

/// Dispatch on a method identifier ("owadd", "ksdd", "centroid") with
/// JSON parameter overrides. Unknown identifiers are rejected.
RunResult run_method(const Stream& stream, const std::string& method,
                     const nlohmann::json& params, std::uint64_t stream_seed,
                     const std::optional<AutoConfirmPolicy>& auto_confirm = {});

void write_verdicts_csv(const RunResult& result, const std::filesystem::path& path);
void write_labels_csv(const RunResult& result, const std::filesystem::path& path);
std::vector<VerdictRow> read_verdicts_csv(const std::filesystem::path& path);
std::vector<std::vector<bool>> read_labels_csv(const std::filesystem::path& path);

struct MetricReport {
    std::optional<double> d1;
    std::optional<double> d2;
    std::optional<double> r;
    ClassificationReport classification;
    int n_chunks = 0;
    int n_detections = 0;
    int n_events = 0;

    nlohmann::json to_json() const;
};

/// Scores one run against ground truth. Novelty appearances count as drift
/// events; with no events at all the drift measures stay absent.
MetricReport evaluate_run(const std::vector<VerdictRow>& verdicts,
                          const std::vector<std::vector<bool>>& predicted_known,
                          const GroundTruth& truth,
                          RMeasureVariant r_variant = RMeasureVariant::normalized);

void write_report_json(const MetricReport& report, const std::filesystem::path& path);
void write_chunk_series_csv(const MetricReport& report,
                            const std::vector<VerdictRow>& verdicts,
                            const std::filesystem::path& path);

// ---- experiment specs -----------------------------------------------------

struct MethodSpec {
    std::string method;
    nlohmann::json params; // method-specific overrides
};

struct StreamJob {
    std::string name;
    int replication = 0;
    StreamConfig config;
    std::string file; // relative to the output directory
};

struct ExperimentSpec {
    std::vector<StreamJob> jobs;
    std::vector<MethodSpec> methods;
    std::optional<AutoConfirmPolicy> auto_confirm;
    RMeasureVariant r_variant = RMeasureVariant::normalized;
    std::string output_dir = "owadd-out";
};

/// Parses and expands an experiment spec: every stream entry becomes
/// `replications` jobs with seeds base_seed + replication index.
ExperimentSpec parse_experiment_spec(const nlohmann::json& spec,
                                     std::optional<std::uint64_t> base_seed_override = {});

/// generate: one stream file per job plus manifest.json. Rewrites are
/// byte-identical for identical specs.
void cmd_generate(const ExperimentSpec& spec, const std::filesystem::path& out_dir);

/// detect: runs `method` over every manifest stream; writes
/// verdicts/<method>/<job>.csv, labels/<method>/<job>.csv and
/// runs/<method>/<job>.run.json. `jobs` controls stream-level parallelism.
/// All stream files are checked before any run starts.
void cmd_detect(const std::filesystem::path& manifest_path, const MethodSpec& method,
                const std::filesystem::path& out_dir,
                const std::optional<AutoConfirmPolicy>& auto_confirm, int jobs = 1);

/// detect over explicit stream files instead of a manifest; output stems
/// are the file basenames.
void cmd_detect_files(const std::vector<std::filesystem::path>& stream_files,
                      const MethodSpec& method, const std::filesystem::path& out_dir,
                      const std::optional<AutoConfirmPolicy>& auto_confirm, int jobs = 1);

/// evaluate: scores every (method, job) run found under out_dir, writing
/// reports/<method>/<job>.report.json, .chunks.csv, plus aggregated
/// summary.csv and ranks.csv.
void cmd_evaluate(const std::filesystem::path& manifest_path,
                  const std::filesystem::path& out_dir, RMeasureVariant r_variant);

} // namespace owadd
