#include "owadd/streamgen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "owadd/rng.hpp"

namespace owadd {

void StreamConfig::validate() const {
    if (n_chunks < 1) throw std::invalid_argument("StreamConfig: n_chunks must be >= 1");
    if (chunk_size < 1) throw std::invalid_argument("StreamConfig: chunk_size must be >= 1");
    if (n_features < 1) throw std::invalid_argument("StreamConfig: n_features must be >= 1");
    if (n_known_classes < 1) throw std::invalid_argument("StreamConfig: n_known_classes must be >= 1");
    if (n_drifts < 0 || n_novelties < 0) {
        throw std::invalid_argument("StreamConfig: event counts must be non-negative");
    }
    if (n_drifts + n_novelties >= n_chunks) {
        throw std::invalid_argument("StreamConfig: n_drifts + n_novelties must be < n_chunks");
    }
    if (novel_proportion < 0.0 || novel_proportion >= 1.0) {
        throw std::invalid_argument("StreamConfig: novel_proportion must be in [0,1)");
    }
    if (!(class_separation > 0.0)) {
        throw std::invalid_argument("StreamConfig: class_separation must be > 0");
    }
}

std::vector<int> GroundTruth::event_chunks() const {
    std::vector<int> out;
    out.reserve(events.size());
    for (const auto& e : events) out.push_back(e.chunk_index);
    return out;
}

std::vector<std::vector<bool>> GroundTruth::known_labels() const {
    std::vector<std::vector<bool>> out;
    out.reserve(class_ids.size());
    for (const auto& chunk : class_ids) {
        std::vector<bool> labels(chunk.size());
        for (std::size_t i = 0; i < chunk.size(); ++i) labels[i] = !is_unknown(chunk[i]);
        out.push_back(std::move(labels));
    }
    return out;
}

std::vector<StreamEvent> event_schedule(const StreamConfig& config) {
    config.validate();
    const int m = config.n_drifts + config.n_novelties;
    std::vector<StreamEvent> events;
    events.reserve(static_cast<std::size_t>(m));

    int drifts_left = config.n_drifts;
    int novelties_left = config.n_novelties;
    bool novelty_turn = true;
    int next_novel_class = config.n_known_classes;

    for (int i = 0; i < m; ++i) {
        int index = static_cast<int>(
            (static_cast<long long>(i + 1) * config.n_chunks) / (m + 1));
        // resolve collisions by pushing the later event one chunk forward
        if (!events.empty() && index <= events.back().chunk_index) {
            index = events.back().chunk_index + 1;
        }

        EventType type;
        if (novelties_left > 0 && (novelty_turn || drifts_left == 0)) {
            type = EventType::novelty;
            --novelties_left;
        } else {
            type = EventType::drift;
            --drifts_left;
        }
        novelty_turn = !novelty_turn;

        const int class_id = (type == EventType::novelty) ? next_novel_class++ : -1;
        events.push_back({index, type, class_id});
    }
    return events;
}

namespace {

Eigen::VectorXd draw_center(Rng& rng, int dim, double separation) {
    Eigen::VectorXd c(dim);
    for (int i = 0; i < dim; ++i) c(i) = separation * rng.normal();
    return c;
}

/// Largest-remainder apportionment of `total` rows over `weights`,
/// deterministic with ties broken by position.
std::vector<int> apportion(int total, const std::vector<double>& weights) {
    const double wsum = std::accumulate(weights.begin(), weights.end(), 0.0);
    std::vector<int> counts(weights.size(), 0);
    if (total <= 0 || wsum <= 0.0) return counts;

    std::vector<double> remainders(weights.size());
    int assigned = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        const double exact = total * weights[i] / wsum;
        counts[i] = static_cast<int>(exact);
        remainders[i] = exact - counts[i];
        assigned += counts[i];
    }
    std::vector<std::size_t> order(weights.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return remainders[a] > remainders[b]; });
    for (int k = 0; k < total - assigned; ++k) ++counts[order[static_cast<std::size_t>(k)]];
    return counts;
}

} // namespace

Stream generate_stream(const StreamConfig& config) {
    config.validate();
    Rng rng(config.seed);

    const std::vector<StreamEvent> events = event_schedule(config);
    std::size_t next_event = 0;

    std::vector<Eigen::VectorXd> known_centers;
    known_centers.reserve(static_cast<std::size_t>(config.n_known_classes));
    for (int k = 0; k < config.n_known_classes; ++k) {
        known_centers.push_back(draw_center(rng, config.n_features, config.class_separation));
    }
    std::vector<int> novel_ids;              // appearance order
    std::vector<Eigen::VectorXd> novel_centers;

    Stream stream;
    stream.truth.events = events;
    stream.truth.n_known_classes = config.n_known_classes;
    stream.chunks.reserve(static_cast<std::size_t>(config.n_chunks));
    stream.truth.class_ids.reserve(static_cast<std::size_t>(config.n_chunks));

    for (int n = 0; n < config.n_chunks; ++n) {
        while (next_event < events.size() && events[next_event].chunk_index == n) {
            const StreamEvent& event = events[next_event];
            if (event.type == EventType::drift) {
                for (auto& c : known_centers) {
                    c = draw_center(rng, config.n_features, config.class_separation);
                }
            } else {
                novel_ids.push_back(event.class_id);
                novel_centers.push_back(
                    draw_center(rng, config.n_features, config.class_separation));
            }
            ++next_event;
        }

        // per-class row counts for this chunk
        int novel_rows = 0;
        std::vector<int> novel_counts;
        if (!novel_ids.empty()) {
            novel_rows = static_cast<int>(std::llround(config.novel_proportion * config.chunk_size));
            const std::size_t k = novel_ids.size();
            std::vector<double> weights(k, 0.0);
            if (k == 1) {
                weights[0] = 1.0;
            } else {
                // the most recent novelty takes half the novel mass
                weights[k - 1] = 0.5;
                for (std::size_t i = 0; i + 1 < k; ++i) weights[i] = 0.5 / static_cast<double>(k - 1);
            }
            novel_counts = apportion(novel_rows, weights);
            novel_rows = std::accumulate(novel_counts.begin(), novel_counts.end(), 0);
        }
        const std::vector<int> known_counts =
            apportion(config.chunk_size - novel_rows,
                      std::vector<double>(static_cast<std::size_t>(config.n_known_classes), 1.0));

        Eigen::MatrixXd rows(config.chunk_size, config.n_features);
        std::vector<int> labels(static_cast<std::size_t>(config.chunk_size));
        Eigen::Index row = 0;
        auto emit = [&](const Eigen::VectorXd& center, int class_id, int count) {
            for (int i = 0; i < count; ++i) {
                for (int f = 0; f < config.n_features; ++f) {
                    rows(row, f) = center(f) + rng.normal();
                }
                labels[static_cast<std::size_t>(row)] = class_id;
                ++row;
            }
        };
        for (int k = 0; k < config.n_known_classes; ++k) {
            emit(known_centers[static_cast<std::size_t>(k)], k, known_counts[static_cast<std::size_t>(k)]);
        }
        for (std::size_t i = 0; i < novel_ids.size(); ++i) {
            emit(novel_centers[i], novel_ids[i], novel_counts[i]);
        }

        std::vector<Eigen::Index> perm(static_cast<std::size_t>(config.chunk_size));
        std::iota(perm.begin(), perm.end(), Eigen::Index{0});
        rng.shuffle(perm);
        Eigen::MatrixXd shuffled(config.chunk_size, config.n_features);
        std::vector<int> shuffled_labels(labels.size());
        for (Eigen::Index i = 0; i < config.chunk_size; ++i) {
            shuffled.row(i) = rows.row(perm[static_cast<std::size_t>(i)]);
            shuffled_labels[static_cast<std::size_t>(i)] =
                labels[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])];
        }

        stream.chunks.push_back(std::move(shuffled));
        stream.truth.class_ids.push_back(std::move(shuffled_labels));
    }
    return stream;
}

} // namespace owadd
