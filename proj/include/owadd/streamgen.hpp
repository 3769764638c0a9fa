#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace owadd {

struct StreamConfig {
    int n_chunks = 200;
    int chunk_size = 200;
    int n_features = 50;
    int n_known_classes = 2;
    int n_drifts = 0;
    int n_novelties = 0;
    double novel_proportion = 0.2;
    double class_separation = 2.0;
    std::uint64_t seed = 0;

    void validate() const;
};

enum class EventType { drift, novelty };

struct StreamEvent {
    int chunk_index;
    EventType type;
    int class_id; // novel class id for novelty events, -1 for drifts
};

/// Ground truth emitted with every generated stream. Classes with id >=
/// n_known_classes are novel and stay labeled unknown for the whole stream.
struct GroundTruth {
    std::vector<StreamEvent> events;
    std::vector<std::vector<int>> class_ids; // per chunk, per row
    int n_known_classes = 0;

    bool is_unknown(int class_id) const { return class_id >= n_known_classes; }
    std::vector<int> event_chunks() const;
    /// Per-chunk known flags (true = known class), aligned to rows.
    std::vector<std::vector<bool>> known_labels() const;
};

struct Stream {
    std::vector<Eigen::MatrixXd> chunks;
    GroundTruth truth;
};

/// Deterministic, seed-independent event placement: with m = n_drifts +
/// n_novelties, events sit at chunk indices (i+1)*n_chunks/(m+1) (integer
/// division) for i = 0..m-1, types assigned round-robin starting with
/// novelty until one type runs out.
std::vector<StreamEvent> event_schedule(const StreamConfig& config);

/// Gaussian-cluster stream: known-class centers resample at drift events,
/// novelty events add a class that keeps drawing a novel_proportion share
/// of each later chunk (most recent novelty takes half the novel mass).
Stream generate_stream(const StreamConfig& config);

} // namespace owadd
