#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <vector>

#include "owadd/rng.hpp"

namespace owadd {

enum class Activation { relu, linear };

enum class TrainLoss { mean_absolute_error, mean_squared_error };

enum class Optimizer { adam };

struct TrainConfig {
    int epochs = 400;
    double learning_rate = 1e-3;
    int batch_size = 32;
    Optimizer optimizer = Optimizer::adam;
    TrainLoss loss = TrainLoss::mean_squared_error;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    void validate() const {
        if (epochs < 1) throw std::invalid_argument("TrainConfig: epochs must be >= 1");
        if (!(learning_rate > 0.0)) throw std::invalid_argument("TrainConfig: learning_rate must be > 0");
        if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
    }
};

/// Training produced a non-finite loss.
class TrainingDivergence : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Dense feed-forward autoencoder with relu hidden layers and a linear
/// output layer. Copying yields a deep, independent clone. Data matrices
/// are row-per-sample.
class Autoencoder {
public:
    struct Layer {
        Eigen::MatrixXd weight; // output_width x input_width
        Eigen::VectorXd bias;   // output_width
        Activation activation;
    };

    struct Gradients {
        double loss;
        std::vector<Eigen::MatrixXd> weight;
        std::vector<Eigen::VectorXd> bias;
    };

    /// Topology input_dim -> hidden_widths... -> input_dim, Glorot-uniform
    /// weights drawn from `seed`.
    Autoencoder(int input_dim, const std::vector<int>& hidden_widths, std::uint64_t seed);

    int input_dim() const { return input_dim_; }
    const std::vector<Layer>& layers() const { return layers_; }
    std::vector<Layer>& layers() { return layers_; }
    std::uint64_t seed() const { return seed_; }

    Eigen::VectorXd reconstruct(const Eigen::VectorXd& x) const;
    Eigen::MatrixXd reconstruct_batch(const Eigen::MatrixXd& rows) const;

    /// Per-sample L1 reconstruction error: sum over features of |x - A(x)|.
    Eigen::VectorXd reconstruction_errors(const Eigen::MatrixXd& rows) const;

    /// Loss and its analytic gradients on the given rows (mean over samples
    /// and features).
    Gradients compute_gradients(const Eigen::MatrixXd& rows,
                                TrainLoss loss = TrainLoss::mean_absolute_error) const;

    /// Adam mini-batch training on mean absolute reconstruction error.
    /// Optimizer moments are fresh per call; weights continue from their
    /// current values. Returns the mean loss over the final epoch.
    double train(const Eigen::MatrixXd& rows, const TrainConfig& config);

    Rng& rng() { return rng_; }
    const Rng& rng() const { return rng_; }

    void save(const std::filesystem::path& path) const;
    static Autoencoder load(const std::filesystem::path& path);

    bool operator==(const Autoencoder& other) const;

private:
    Autoencoder() = default;

    void check_width(Eigen::Index cols) const;

    int input_dim_ = 0;
    std::uint64_t seed_ = 0;
    std::vector<Layer> layers_;
    Rng rng_{0};

    friend struct AutoencoderCodec;
};

} // namespace owadd
