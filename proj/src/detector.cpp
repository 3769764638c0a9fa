#include "owadd/detector.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "json.hpp"
#include "owadd/serialize.hpp"

namespace owadd {

Standardizer Standardizer::fit(const Eigen::MatrixXd& rows) {
    if (rows.rows() == 0) throw std::invalid_argument("Standardizer: empty fit data");
    Standardizer s;
    s.mean = rows.colwise().mean();
    const Eigen::Index n = rows.rows();
    s.scale = Eigen::VectorXd::Ones(rows.cols());
    if (n > 1) {
        const Eigen::MatrixXd centered = rows.rowwise() - s.mean.transpose();
        const Eigen::VectorXd var =
            centered.cwiseProduct(centered).colwise().sum() / static_cast<double>(n - 1);
        for (Eigen::Index c = 0; c < rows.cols(); ++c) {
            const double sd = std::sqrt(var(c));
            if (sd > 0.0) s.scale(c) = sd;
        }
    }
    return s;
}

Eigen::MatrixXd Standardizer::transform(const Eigen::MatrixXd& rows) const {
    if (rows.cols() != mean.size()) {
        throw std::invalid_argument("Standardizer: feature width mismatch");
    }
    return (rows.rowwise() - mean.transpose()).array().rowwise() /
           scale.transpose().array();
}

TrainConfig DetectorConfig::train_config() const {
    TrainConfig tc;
    tc.epochs = epochs;
    tc.learning_rate = learning_rate;
    tc.batch_size = batch_size;
    tc.loss = loss;
    return tc;
}

void DetectorConfig::validate() const {
    if (replications < 1) throw std::invalid_argument("DetectorConfig: replications must be >= 1");
    if (sample_size < 2) throw std::invalid_argument("DetectorConfig: sample_size must be >= 2");
    if (sample_size > buffer_capacity) {
        throw std::invalid_argument("DetectorConfig: sample_size exceeds buffer_capacity");
    }
    if (!(drift_threshold > 0.0 && drift_threshold < 1.0)) {
        throw std::invalid_argument("DetectorConfig: drift_threshold must be in (0,1)");
    }
    if (novelty_threshold < 0.0) {
        throw std::invalid_argument("DetectorConfig: novelty_threshold must be >= 0");
    }
    if (buffer_capacity < 1) throw std::invalid_argument("DetectorConfig: buffer_capacity must be >= 1");
    if (!(significance > 0.0 && significance < 1.0)) {
        throw std::invalid_argument("DetectorConfig: significance must be in (0,1)");
    }
    if (hidden_widths.empty()) throw std::invalid_argument("DetectorConfig: hidden_widths must be non-empty");
    train_config().validate();
}

void ErrorBuffer::append(const Eigen::VectorXd& errors) {
    values_.insert(values_.end(), errors.data(), errors.data() + errors.size());
    if (values_.size() > capacity_) {
        values_.erase(values_.begin(),
                      values_.begin() + static_cast<std::ptrdiff_t>(values_.size() - capacity_));
    }
}

std::size_t ChunkVerdict::unknown_count() const {
    return static_cast<std::size_t>(
        std::count(labels_known.begin(), labels_known.end(), false));
}

namespace {

// Seeds for the two models and the test-subsampling source are derived
// from the config seed so distinct consumers never share a stream.
struct SeedSplit {
    std::uint64_t model;
    std::uint64_t sampler;
};

SeedSplit split_seed(std::uint64_t seed) {
    Rng derive(seed);
    return {derive.next_u64(), derive.next_u64()};
}

const Eigen::MatrixXd& checked_first_chunk(const Eigen::MatrixXd& chunk) {
    if (chunk.rows() == 0 || chunk.cols() == 0) {
        throw std::invalid_argument("Detector: first chunk must be non-empty");
    }
    return chunk;
}

} // namespace

Detector::Detector(const Eigen::MatrixXd& first_chunk, const DetectorConfig& config)
    : config_((config.validate(), config)),
      drift_model_(static_cast<int>(checked_first_chunk(first_chunk).cols()),
                   config.hidden_widths, split_seed(config.seed).model),
      known_class_model_(drift_model_),
      buffer_(static_cast<std::size_t>(config.buffer_capacity)),
      rng_(split_seed(config.seed).sampler) {
    scaler_ = Standardizer::fit(first_chunk);
    const Eigen::MatrixXd scaled = scaler_.transform(first_chunk);

    drift_model_.train(scaled, config_.train_config());
    known_class_model_ = drift_model_; // the mirror

    const Eigen::VectorXd initial_errors = drift_model_.reconstruction_errors(scaled);
    buffer_.append(initial_errors);

    initial_verdict_.chunk_index = 0;
    initial_verdict_.drift = false;
    initial_verdict_.positive_test_count = 0;
    initial_verdict_.mean_current_error = initial_errors.mean();
    initial_verdict_.labels_known = recognize_scaled(scaled);
}

void Detector::check_width(Eigen::Index cols) const {
    if (cols != drift_model_.input_dim()) {
        throw std::invalid_argument("Detector: chunk width " + std::to_string(cols) +
                                    " does not match stream width " +
                                    std::to_string(drift_model_.input_dim()));
    }
}

std::vector<bool> Detector::recognize_scaled(const Eigen::MatrixXd& scaled) {
    const Eigen::VectorXd errors = known_class_model_.reconstruction_errors(scaled);
    const std::span<const double> view(errors.data(), static_cast<std::size_t>(errors.size()));
    if (!kde_) kde_ = kde_fit(view);
    const std::vector<double> scores = kde_score(*kde_, view);
    std::vector<bool> labels(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
        labels[i] = scores[i] >= config_.novelty_threshold;
    }
    return labels;
}

std::vector<bool> Detector::recognize_unknown(const Eigen::MatrixXd& chunk) {
    check_width(chunk.cols());
    return recognize_scaled(scaler_.transform(chunk));
}

Eigen::VectorXd Detector::known_class_errors(const Eigen::MatrixXd& chunk) const {
    check_width(chunk.cols());
    return known_class_model_.reconstruction_errors(scaler_.transform(chunk));
}

ChunkVerdict Detector::process_chunk(const Eigen::MatrixXd& chunk) {
    check_width(chunk.cols());
    if (chunk.rows() == 0) throw std::invalid_argument("process_chunk: empty chunk");

    const Eigen::MatrixXd scaled = scaler_.transform(chunk);
    const Eigen::VectorXd errors = drift_model_.reconstruction_errors(scaled);
    const std::vector<double> current(errors.data(), errors.data() + errors.size());

    ChunkVerdict verdict;
    verdict.chunk_index = ++chunk_counter_;
    verdict.mean_current_error = errors.mean();
    verdict.mean_reference_error =
        buffer_.size() > 0 ? mean(buffer_.values()) : std::numeric_limits<double>::quiet_NaN();

    if (!buffer_.full()) {
        buffer_.append(errors);
    } else {
        if (current.size() < static_cast<std::size_t>(config_.sample_size)) {
            throw std::invalid_argument("process_chunk: chunk smaller than test sample_size");
        }
        int positives = 0;
        for (int i = 0; i < config_.replications; ++i) {
            const std::vector<double> ref = subsample(buffer_.values(), config_.sample_size, rng_);
            const std::vector<double> cur = subsample(current, config_.sample_size, rng_);
            if (one_sided_t_test(ref, cur).p_value < config_.significance) ++positives;
        }
        verdict.positive_test_count = positives;
        if (static_cast<double>(positives) / config_.replications > config_.drift_threshold) {
            verdict.drift = true;
            drift_model_.train(scaled, config_.train_config());
            buffer_.clear();
        }
    }

    verdict.labels_known = recognize_scaled(scaled);
    return verdict;
}

void Detector::confirm_novelty(const Eigen::MatrixXd& chunk) {
    check_width(chunk.cols());
    if (chunk.rows() == 0) throw std::invalid_argument("confirm_novelty: empty chunk");
    const Eigen::MatrixXd scaled = scaler_.transform(chunk);
    known_class_model_.train(scaled, config_.train_config());
    const Eigen::VectorXd errors = known_class_model_.reconstruction_errors(scaled);
    kde_ = kde_fit(std::span<const double>(errors.data(), static_cast<std::size_t>(errors.size())));
}

namespace {

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
    const auto v = j.get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

} // namespace

Detector::Detector(DetectorConfig config, Autoencoder drift_model, Autoencoder kc_model)
    : config_(std::move(config)),
      drift_model_(std::move(drift_model)),
      known_class_model_(std::move(kc_model)),
      buffer_(static_cast<std::size_t>(std::max(config_.buffer_capacity, 1))),
      rng_(0) {}

void Detector::save(const std::filesystem::path& path) const {
    nlohmann::json j;
    j["format"] = "owadd.detector-state";
    j["version"] = 1;
    j["config"] = {
        {"replications", config_.replications},
        {"sample_size", config_.sample_size},
        {"drift_threshold", config_.drift_threshold},
        {"novelty_threshold", config_.novelty_threshold},
        {"buffer_capacity", config_.buffer_capacity},
        {"epochs", config_.epochs},
        {"significance", config_.significance},
        {"hidden_widths", config_.hidden_widths},
        {"learning_rate", config_.learning_rate},
        {"batch_size", config_.batch_size},
        {"loss", config_.loss == TrainLoss::mean_absolute_error ? "mae" : "mse"},
        {"seed", config_.seed},
    };
    j["scaler"] = {{"mean", vector_to_json(scaler_.mean)},
                   {"scale", vector_to_json(scaler_.scale)}};
    j["drift_model"] = AutoencoderCodec::to_json(drift_model_);
    j["known_class_model"] = AutoencoderCodec::to_json(known_class_model_);
    j["buffer"] = buffer_.values();
    if (kde_) {
        j["kde"] = {{"support_points", kde_->support_points},
                    {"bandwidth", kde_->bandwidth},
                    {"degenerate", kde_->degenerate}};
    } else {
        j["kde"] = nullptr;
    }
    j["chunk_counter"] = chunk_counter_;
    j["rng_state"] = rng_.state();

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << j.dump(2) << '\n';
}

Detector Detector::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    nlohmann::json j;
    in >> j;
    if (j.value("format", "") != "owadd.detector-state") {
        throw std::runtime_error("detector snapshot: unrecognized format tag");
    }
    if (j.value("version", 0) != 1) {
        throw std::runtime_error("detector snapshot: unsupported version");
    }

    DetectorConfig config;
    const auto& cj = j.at("config");
    config.replications = cj.at("replications").get<int>();
    config.sample_size = cj.at("sample_size").get<int>();
    config.drift_threshold = cj.at("drift_threshold").get<double>();
    config.novelty_threshold = cj.at("novelty_threshold").get<double>();
    config.buffer_capacity = cj.at("buffer_capacity").get<int>();
    config.epochs = cj.at("epochs").get<int>();
    config.significance = cj.at("significance").get<double>();
    config.hidden_widths = cj.at("hidden_widths").get<std::vector<int>>();
    config.learning_rate = cj.at("learning_rate").get<double>();
    config.batch_size = cj.at("batch_size").get<int>();
    config.loss = cj.at("loss").get<std::string>() == "mae" ? TrainLoss::mean_absolute_error
                                                            : TrainLoss::mean_squared_error;
    config.seed = cj.at("seed").get<std::uint64_t>();

    Detector detector(config, AutoencoderCodec::from_json(j.at("drift_model")),
                      AutoencoderCodec::from_json(j.at("known_class_model")));
    detector.scaler_.mean = vector_from_json(j.at("scaler").at("mean"));
    detector.scaler_.scale = vector_from_json(j.at("scaler").at("scale"));
    for (double v : j.at("buffer").get<std::vector<double>>()) {
        Eigen::VectorXd one(1);
        one(0) = v;
        detector.buffer_.append(one);
    }
    if (!j.at("kde").is_null()) {
        KdeModel kde;
        kde.support_points = j.at("kde").at("support_points").get<std::vector<double>>();
        kde.bandwidth = j.at("kde").at("bandwidth").get<double>();
        kde.degenerate = j.at("kde").at("degenerate").get<bool>();
        detector.kde_ = std::move(kde);
    }
    detector.chunk_counter_ = j.at("chunk_counter").get<std::size_t>();
    detector.rng_.set_state(j.at("rng_state").get<std::uint64_t>());
    return detector;
}

} // namespace owadd
