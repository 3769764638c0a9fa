#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <vector>

#include "owadd/autoencoder.hpp"
#include "owadd/rng.hpp"
#include "owadd/stats.hpp"

namespace owadd {

/// Per-feature standardization fitted once on the first chunk and then
/// frozen; zero-variance features pass through unscaled.
struct Standardizer {
    Eigen::VectorXd mean;
    Eigen::VectorXd scale;

    static Standardizer fit(const Eigen::MatrixXd& rows);
    Eigen::MatrixXd transform(const Eigen::MatrixXd& rows) const;
};

struct DetectorConfig {
    int replications = 15;
    int sample_size = 30;
    double drift_threshold = 0.3;
    double novelty_threshold = 0.02;
    int buffer_capacity = 1000;
    int epochs = 400;
    double significance = 0.05;
    std::vector<int> hidden_widths = {10, 10, 10};
    double learning_rate = 1e-3;
    int batch_size = 32;
    TrainLoss loss = TrainLoss::mean_squared_error;
    std::uint64_t seed = 0;

    TrainConfig train_config() const;
    void validate() const;
};

/// Bounded store of reference reconstruction errors; cleared whenever a
/// drift is signaled.
class ErrorBuffer {
public:
    explicit ErrorBuffer(std::size_t capacity) : capacity_(capacity) {}

    /// Appends, then drops oldest entries beyond capacity.
    void append(const Eigen::VectorXd& errors);
    void clear() { values_.clear(); }
    bool full() const { return values_.size() >= capacity_; }
    std::size_t size() const { return values_.size(); }
    std::size_t capacity() const { return capacity_; }
    const std::vector<double>& values() const { return values_; }

private:
    std::vector<double> values_;
    std::size_t capacity_;
};

struct ChunkVerdict {
    std::size_t chunk_index = 0;
    bool drift = false;
    std::vector<bool> labels_known; // aligned to chunk rows; true = known
    int positive_test_count = 0;    // significant tests among the r replications
    double mean_reference_error = std::numeric_limits<double>::quiet_NaN();
    double mean_current_error = std::numeric_limits<double>::quiet_NaN();

    std::size_t unknown_count() const;
};

/// Drift detector with mirrored autoencoders: the drift model retrains on
/// every detection, the known-class mirror only moves through
/// confirm_novelty. Chunks are raw (unscaled) feature matrices; the frozen
/// first-chunk standardizer is applied internally.
class Detector {
public:
    Detector(const Eigen::MatrixXd& first_chunk, const DetectorConfig& config);

    /// Verdict for the initialization chunk (index 0, never a drift).
    const ChunkVerdict& initial_verdict() const { return initial_verdict_; }

    ChunkVerdict process_chunk(const Eigen::MatrixXd& chunk);

    /// Known/unknown labels from the known-class mirror, without touching
    /// drift state.
    std::vector<bool> recognize_unknown(const Eigen::MatrixXd& chunk);

    /// Reconstruction errors of the known-class mirror on a raw chunk.
    Eigen::VectorXd known_class_errors(const Eigen::MatrixXd& chunk) const;

    /// Folds a confirmed novelty into the known-class mirror: continues its
    /// training on the chunk and refits the density model. Drift model and
    /// buffer are untouched.
    void confirm_novelty(const Eigen::MatrixXd& chunk);

    const DetectorConfig& config() const { return config_; }
    const Autoencoder& drift_model() const { return drift_model_; }
    const Autoencoder& known_class_model() const { return known_class_model_; }
    const ErrorBuffer& buffer() const { return buffer_; }
    const std::optional<KdeModel>& kde() const { return kde_; }
    const Standardizer& scaler() const { return scaler_; }
    std::size_t chunk_counter() const { return chunk_counter_; }

    void save(const std::filesystem::path& path) const;
    static Detector load(const std::filesystem::path& path);

private:
    Detector(DetectorConfig config, Autoencoder drift_model, Autoencoder kc_model);

    std::vector<bool> recognize_scaled(const Eigen::MatrixXd& scaled);
    void check_width(Eigen::Index cols) const;

    DetectorConfig config_;
    Standardizer scaler_;
    Autoencoder drift_model_;
    Autoencoder known_class_model_;
    ErrorBuffer buffer_;
    std::optional<KdeModel> kde_;
    std::size_t chunk_counter_ = 0;
    Rng rng_;
    ChunkVerdict initial_verdict_;
};

} // namespace owadd
