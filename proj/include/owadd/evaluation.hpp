#pragma once

#include <optional>
#include <span>
#include <vector>

namespace owadd {

struct DetectionLog {
    std::vector<int> detections; // chunk indices flagged as drift
    int n_chunks = 0;
};

enum class RMeasureVariant {
    normalized,     // |n_detections - n_events| / n_events (default)
    raw_difference, // |n_detections - n_events|
};

/// Mean distance from each detection to the nearest true event; a silent
/// detector is penalized with n_chunks.
double d1(const DetectionLog& log, std::span<const int> events);

/// Mean distance from each true event to the nearest detection; a silent
/// detector is penalized with n_chunks.
double d2(const DetectionLog& log, std::span<const int> events);

double r_measure(const DetectionLog& log, std::span<const int> events,
                 RMeasureVariant variant = RMeasureVariant::normalized);

struct ConfusionCounts {
    long tp = 0; // known predicted known
    long fn = 0; // known predicted unknown
    long tn = 0; // unknown predicted unknown
    long fp = 0; // unknown predicted known
};

struct ChunkMetricsRow {
    int chunk = 0;
    std::optional<double> recall;
    std::optional<double> specificity;
    std::optional<double> balanced_accuracy;
    double unknown_fraction = 0.0; // of the truth labels
};

/// Known samples are the positive class. Pooled totals over the whole
/// stream are the headline numbers; the per-chunk series leaves a metric
/// absent on chunks where its denominator is empty.
struct ClassificationReport {
    ConfusionCounts counts;
    double recall = 0.0;
    double specificity = 0.0;
    double balanced_accuracy = 0.0;
    std::vector<ChunkMetricsRow> per_chunk;
};

ClassificationReport classification_metrics(
    const std::vector<std::vector<bool>>& predicted_known,
    const std::vector<std::vector<bool>>& truth_known);

} // namespace owadd
