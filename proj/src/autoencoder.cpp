#include "owadd/autoencoder.hpp"

#include <cmath>
#include <fstream>
#include <numeric>

#include "json.hpp"
#include "owadd/serialize.hpp"

namespace owadd {

namespace {

Eigen::MatrixXd activate(Eigen::MatrixXd z, Activation a) {
    if (a == Activation::relu) return z.cwiseMax(0.0);
    return z;
}

// L1 subgradient at zero is defined as 0.
double sign_or_zero(double v) {
    if (v > 0.0) return 1.0;
    if (v < 0.0) return -1.0;
    return 0.0;
}

} // namespace

Autoencoder::Autoencoder(int input_dim, const std::vector<int>& hidden_widths,
                         std::uint64_t seed)
    : input_dim_(input_dim), seed_(seed), rng_(seed) {
    if (input_dim < 1) throw std::invalid_argument("Autoencoder: input_dim must be >= 1");
    if (hidden_widths.empty()) throw std::invalid_argument("Autoencoder: hidden_widths must be non-empty");
    for (int w : hidden_widths) {
        if (w < 1) throw std::invalid_argument("Autoencoder: layer widths must be >= 1");
    }

    std::vector<int> widths;
    widths.push_back(input_dim);
    widths.insert(widths.end(), hidden_widths.begin(), hidden_widths.end());
    widths.push_back(input_dim);

    layers_.reserve(widths.size() - 1);
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        const int fan_in = widths[l];
        const int fan_out = widths[l + 1];
        Layer layer;
        layer.activation = (l + 2 == widths.size()) ? Activation::linear : Activation::relu;
        layer.weight.resize(fan_out, fan_in);
        layer.bias = Eigen::VectorXd::Zero(fan_out);
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        for (int r = 0; r < fan_out; ++r) {
            for (int c = 0; c < fan_in; ++c) {
                layer.weight(r, c) = (2.0 * rng_.uniform() - 1.0) * limit;
            }
        }
        layers_.push_back(std::move(layer));
    }
}

void Autoencoder::check_width(Eigen::Index cols) const {
    if (cols != input_dim_) {
        throw std::invalid_argument("Autoencoder: input width " + std::to_string(cols) +
                                    " does not match model input_dim " +
                                    std::to_string(input_dim_));
    }
}

Eigen::MatrixXd Autoencoder::reconstruct_batch(const Eigen::MatrixXd& rows) const {
    check_width(rows.cols());
    Eigen::MatrixXd a = rows;
    for (const Layer& layer : layers_) {
        Eigen::MatrixXd z = a * layer.weight.transpose();
        z.rowwise() += layer.bias.transpose();
        a = activate(std::move(z), layer.activation);
    }
    return a;
}

Eigen::VectorXd Autoencoder::reconstruct(const Eigen::VectorXd& x) const {
    check_width(x.size());
    return reconstruct_batch(x.transpose()).row(0);
}

Eigen::VectorXd Autoencoder::reconstruction_errors(const Eigen::MatrixXd& rows) const {
    return (reconstruct_batch(rows) - rows).cwiseAbs().rowwise().sum();
}

Autoencoder::Gradients Autoencoder::compute_gradients(const Eigen::MatrixXd& rows,
                                                      TrainLoss loss) const {
    check_width(rows.cols());
    if (rows.rows() == 0) throw std::invalid_argument("compute_gradients: empty batch");

    const std::size_t n_layers = layers_.size();
    std::vector<Eigen::MatrixXd> inputs;  // activation entering each layer
    std::vector<Eigen::MatrixXd> preacts; // z of each layer
    inputs.reserve(n_layers);
    preacts.reserve(n_layers);

    Eigen::MatrixXd a = rows;
    for (const Layer& layer : layers_) {
        inputs.push_back(a);
        Eigen::MatrixXd z = a * layer.weight.transpose();
        z.rowwise() += layer.bias.transpose();
        preacts.push_back(z);
        a = activate(std::move(z), layer.activation);
    }

    const double denom = static_cast<double>(rows.rows()) * static_cast<double>(rows.cols());
    const Eigen::MatrixXd residual = a - rows;
    Gradients grads;
    grads.weight.resize(n_layers);
    grads.bias.resize(n_layers);

    Eigen::MatrixXd da;
    if (loss == TrainLoss::mean_absolute_error) {
        grads.loss = residual.cwiseAbs().sum() / denom;
        da = residual.unaryExpr(&sign_or_zero) / denom;
    } else {
        grads.loss = residual.squaredNorm() / denom;
        da = 2.0 * residual / denom;
    }
    for (std::size_t k = n_layers; k-- > 0;) {
        Eigen::MatrixXd dz;
        if (layers_[k].activation == Activation::relu) {
            dz = da.cwiseProduct((preacts[k].array() > 0.0).cast<double>().matrix());
        } else {
            dz = std::move(da);
        }
        grads.weight[k] = dz.transpose() * inputs[k];
        grads.bias[k] = dz.colwise().sum();
        if (k > 0) da = dz * layers_[k].weight;
    }
    return grads;
}

double Autoencoder::train(const Eigen::MatrixXd& rows, const TrainConfig& config) {
    config.validate();
    check_width(rows.cols());
    const Eigen::Index n = rows.rows();
    if (n == 0) throw std::invalid_argument("train: empty chunk");

    std::vector<Eigen::MatrixXd> m_w(layers_.size()), v_w(layers_.size());
    std::vector<Eigen::VectorXd> m_b(layers_.size()), v_b(layers_.size());
    for (std::size_t k = 0; k < layers_.size(); ++k) {
        m_w[k] = Eigen::MatrixXd::Zero(layers_[k].weight.rows(), layers_[k].weight.cols());
        v_w[k] = m_w[k];
        m_b[k] = Eigen::VectorXd::Zero(layers_[k].bias.size());
        v_b[k] = m_b[k];
    }

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});

    const Eigen::Index batch = std::min<Eigen::Index>(config.batch_size, n);
    double last_epoch_loss = 0.0;
    long step = 0;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        rng_.shuffle(order);
        double epoch_loss = 0.0;
        int n_batches = 0;
        for (Eigen::Index start = 0; start < n; start += batch) {
            const Eigen::Index size = std::min(batch, n - start);
            Eigen::MatrixXd xb(size, rows.cols());
            for (Eigen::Index i = 0; i < size; ++i) {
                xb.row(i) = rows.row(order[static_cast<std::size_t>(start + i)]);
            }
            const Gradients g = compute_gradients(xb, config.loss);
            if (!std::isfinite(g.loss)) {
                throw TrainingDivergence("training loss became non-finite");
            }
            epoch_loss += g.loss;
            ++n_batches;

            ++step;
            const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
            const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));
            for (std::size_t k = 0; k < layers_.size(); ++k) {
                m_w[k] = config.beta1 * m_w[k] + (1.0 - config.beta1) * g.weight[k];
                v_w[k] = config.beta2 * v_w[k] + (1.0 - config.beta2) * g.weight[k].cwiseProduct(g.weight[k]);
                m_b[k] = config.beta1 * m_b[k] + (1.0 - config.beta1) * g.bias[k];
                v_b[k] = config.beta2 * v_b[k] + (1.0 - config.beta2) * g.bias[k].cwiseProduct(g.bias[k]);

                layers_[k].weight -= (config.learning_rate / bc1) *
                    (m_w[k].array() / ((v_w[k].array() / bc2).sqrt() + config.epsilon)).matrix();
                layers_[k].bias -= (config.learning_rate / bc1) *
                    (m_b[k].array() / ((v_b[k].array() / bc2).sqrt() + config.epsilon)).matrix();
            }
        }
        last_epoch_loss = epoch_loss / n_batches;
    }
    return last_epoch_loss;
}

bool Autoencoder::operator==(const Autoencoder& other) const {
    if (input_dim_ != other.input_dim_ || layers_.size() != other.layers_.size() ||
        rng_.state() != other.rng_.state()) {
        return false;
    }
    for (std::size_t k = 0; k < layers_.size(); ++k) {
        if (layers_[k].activation != other.layers_[k].activation) return false;
        if (layers_[k].weight != other.layers_[k].weight) return false;
        if (layers_[k].bias != other.layers_[k].bias) return false;
    }
    return true;
}

nlohmann::json AutoencoderCodec::to_json(const Autoencoder& model) {
    nlohmann::json j;
    j["format"] = "owadd.model";
    j["version"] = 1;
    j["input_dim"] = model.input_dim_;
    j["seed"] = model.seed_;
    j["rng_state"] = model.rng_.state();
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& layer : model.layers_) {
        nlohmann::json lj;
        lj["in"] = layer.weight.cols();
        lj["out"] = layer.weight.rows();
        lj["activation"] = layer.activation == Activation::relu ? "relu" : "linear";
        std::vector<double> w;
        w.reserve(static_cast<std::size_t>(layer.weight.size()));
        for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
            for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
                w.push_back(layer.weight(r, c));
            }
        }
        lj["weight"] = w;
        lj["bias"] = std::vector<double>(layer.bias.data(), layer.bias.data() + layer.bias.size());
        layers.push_back(std::move(lj));
    }
    j["layers"] = std::move(layers);
    return j;
}

Autoencoder AutoencoderCodec::from_json(const nlohmann::json& j) {
    if (j.value("format", "") != "owadd.model") {
        throw std::runtime_error("model snapshot: unrecognized format tag");
    }
    if (j.value("version", 0) != 1) {
        throw std::runtime_error("model snapshot: unsupported version");
    }
    Autoencoder model;
    model.input_dim_ = j.at("input_dim").get<int>();
    model.seed_ = j.at("seed").get<std::uint64_t>();
    model.rng_.set_state(j.at("rng_state").get<std::uint64_t>());
    for (const auto& lj : j.at("layers")) {
        Autoencoder::Layer layer;
        const auto rows = lj.at("out").get<Eigen::Index>();
        const auto cols = lj.at("in").get<Eigen::Index>();
        layer.activation = lj.at("activation").get<std::string>() == "relu"
                               ? Activation::relu
                               : Activation::linear;
        const auto w = lj.at("weight").get<std::vector<double>>();
        const auto b = lj.at("bias").get<std::vector<double>>();
        if (static_cast<Eigen::Index>(w.size()) != rows * cols ||
            static_cast<Eigen::Index>(b.size()) != rows) {
            throw std::runtime_error("model snapshot: layer shape mismatch");
        }
        layer.weight.resize(rows, cols);
        for (Eigen::Index r = 0; r < rows; ++r) {
            for (Eigen::Index c = 0; c < cols; ++c) {
                layer.weight(r, c) = w[static_cast<std::size_t>(r * cols + c)];
            }
        }
        layer.bias = Eigen::Map<const Eigen::VectorXd>(b.data(), rows);
        model.layers_.push_back(std::move(layer));
    }
    if (model.layers_.empty()) throw std::runtime_error("model snapshot: no layers");
    return model;
}

void Autoencoder::save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << AutoencoderCodec::to_json(*this).dump(2) << '\n';
}

Autoencoder Autoencoder::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    nlohmann::json j;
    in >> j;
    return AutoencoderCodec::from_json(j);
}

} // namespace owadd
