#include "owadd/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace owadd {

namespace {

double min_distance(int index, std::span<const int> targets) {
    double best = std::numeric_limits<double>::infinity();
    for (int t : targets) best = std::min(best, static_cast<double>(std::abs(index - t)));
    return best;
}

// distances are measured over distinct chunk indices; only the R measure
// sees raw detection counts
std::vector<int> distinct(std::span<const int> values) {
    std::vector<int> out(values.begin(), values.end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

} // namespace

double d1(const DetectionLog& log, std::span<const int> events) {
    if (events.empty()) throw std::invalid_argument("d1: event list must be non-empty");
    if (log.detections.empty()) return static_cast<double>(log.n_chunks);
    const std::vector<int> detections = distinct(log.detections);
    double sum = 0.0;
    for (int det : detections) sum += min_distance(det, events);
    return sum / static_cast<double>(detections.size());
}

double d2(const DetectionLog& log, std::span<const int> events) {
    if (events.empty()) throw std::invalid_argument("d2: event list must be non-empty");
    if (log.detections.empty()) return static_cast<double>(log.n_chunks);
    double sum = 0.0;
    for (int event : events) sum += min_distance(event, log.detections);
    return sum / static_cast<double>(events.size());
}

double r_measure(const DetectionLog& log, std::span<const int> events,
                 RMeasureVariant variant) {
    if (events.empty()) throw std::invalid_argument("r_measure: event list must be non-empty");
    const double diff = std::fabs(static_cast<double>(log.detections.size()) -
                                  static_cast<double>(events.size()));
    if (variant == RMeasureVariant::raw_difference) return diff;
    return diff / static_cast<double>(events.size());
}

ClassificationReport classification_metrics(
    const std::vector<std::vector<bool>>& predicted_known,
    const std::vector<std::vector<bool>>& truth_known) {
    if (predicted_known.size() != truth_known.size()) {
        throw std::invalid_argument("classification_metrics: chunk count mismatch");
    }

    ClassificationReport report;
    report.per_chunk.reserve(predicted_known.size());

    for (std::size_t n = 0; n < predicted_known.size(); ++n) {
        const auto& pred = predicted_known[n];
        const auto& truth = truth_known[n];
        if (pred.size() != truth.size()) {
            throw std::invalid_argument("classification_metrics: label length mismatch in chunk " +
                                        std::to_string(n));
        }
        ConfusionCounts c;
        for (std::size_t i = 0; i < pred.size(); ++i) {
            if (truth[i]) {
                pred[i] ? ++c.tp : ++c.fn;
            } else {
                pred[i] ? ++c.fp : ++c.tn;
            }
        }
        report.counts.tp += c.tp;
        report.counts.fn += c.fn;
        report.counts.tn += c.tn;
        report.counts.fp += c.fp;

        ChunkMetricsRow row;
        row.chunk = static_cast<int>(n);
        const long pos = c.tp + c.fn;
        const long neg = c.tn + c.fp;
        if (pos > 0) row.recall = static_cast<double>(c.tp) / static_cast<double>(pos);
        if (neg > 0) row.specificity = static_cast<double>(c.tn) / static_cast<double>(neg);
        if (row.recall && row.specificity) {
            row.balanced_accuracy = 0.5 * (*row.recall + *row.specificity);
        }
        row.unknown_fraction =
            pred.empty() ? 0.0 : static_cast<double>(neg) / static_cast<double>(pred.size());
        report.per_chunk.push_back(row);
    }

    const long pos = report.counts.tp + report.counts.fn;
    const long neg = report.counts.tn + report.counts.fp;
    report.recall = pos > 0 ? static_cast<double>(report.counts.tp) / static_cast<double>(pos)
                            : std::numeric_limits<double>::quiet_NaN();
    report.specificity = neg > 0 ? static_cast<double>(report.counts.tn) / static_cast<double>(neg)
                                 : std::numeric_limits<double>::quiet_NaN();
    report.balanced_accuracy = 0.5 * (report.recall + report.specificity);
    return report;
}

} // namespace owadd
