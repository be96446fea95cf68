#pragma once

#include "sae/kernels.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace sae {

/// One n/p/n autoencoder with tied weights.
///
/// Only the p x n encoder matrix W is stored; decoding multiplies by its
/// transpose, so the decoder can never drift from the encoder.
class AutoencoderLayer {
public:
    AutoencoderLayer() = default;

    /// Zero weights and biases. Throws InvalidDimensions unless n, p >= 1.
    AutoencoderLayer(std::size_t n, std::size_t p);

    /// Takes ownership of explicit parameters; sizes must be p*n, p and n.
    AutoencoderLayer(std::size_t n, std::size_t p, std::vector<double> weights, std::vector<double> enc_bias,
                     std::vector<double> dec_bias);

    std::size_t input_dim() const { return n_; }
    std::size_t hidden_dim() const { return p_; }

    std::span<const double> weights() const { return weights_; }
    std::span<double> weights() { return weights_; }
    std::span<const double> enc_bias() const { return enc_bias_; }
    std::span<double> enc_bias() { return enc_bias_; }
    std::span<const double> dec_bias() const { return dec_bias_; }
    std::span<double> dec_bias() { return dec_bias_; }

    kernels::ConstMatrix weight_matrix() const { return {weights_.data(), p_, n_}; }

    double weight(std::size_t i, std::size_t j) const { return weights_[i * n_ + j]; }

    friend bool operator==(const AutoencoderLayer&, const AutoencoderLayer&) = default;

private:
    std::size_t n_ = 0;
    std::size_t p_ = 0;
    std::vector<double> weights_;
    std::vector<double> enc_bias_;
    std::vector<double> dec_bias_;
};

struct TrainConfig {
    std::size_t epochs = 30;
    double learning_rate = 0.1;
    std::size_t batch_size = 20;
    std::uint64_t seed = 0;
    bool shuffle = true;

    /// Throws InvalidConfig on epochs == 0, learning_rate <= 0 or batch_size == 0.
    void validate() const;
};

struct TrainReport {
    std::vector<double> epoch_loss;  ///< mean per-sample cross-entropy, one per epoch
    double train_rms = 0.0;
    double seconds = 0.0;
};

struct Gradients {
    std::vector<double> weights;  ///< p x n, encoder and tied decoder terms summed
    std::vector<double> enc_bias;
    std::vector<double> dec_bias;
    double mean_loss = 0.0;
};

/// Called after every epoch with the 0-based epoch and its mean loss.
using EpochCallback = std::function<void(std::size_t epoch, double mean_loss)>;

/// W ~ U[-4 sqrt(6/(n+p)), +4 sqrt(6/(n+p))], zero biases.
AutoencoderLayer init_layer(std::size_t n, std::size_t p, std::uint64_t seed);

std::vector<double> encode(const AutoencoderLayer& layer, std::span<const double> x);
std::vector<double> decode(const AutoencoderLayer& layer, std::span<const double> h);
std::vector<double> reconstruct(const AutoencoderLayer& layer, std::span<const double> x);

/// -sum x ln xh + (1 - x) ln(1 - xh), with xh clamped to [1e-12, 1 - 1e-12].
double cross_entropy(std::span<const double> x, std::span<const double> reconstruction);

/// Exact gradients of the batch-mean cross-entropy. With sigmoid outputs the
/// output delta is (reconstruction - x).
Gradients gradients(const AutoencoderLayer& layer, std::span<const std::vector<double>> batch);

/// Minibatch SGD from `init_layer(n, p, config.seed)`. Each epoch visits the
/// data in a seeded shuffled order (if enabled); the last batch may be short.
std::pair<AutoencoderLayer, TrainReport> train_layer(std::span<const std::vector<double>> data,
                                                     std::size_t n, std::size_t p, const TrainConfig& config,
                                                     const EpochCallback& on_epoch = {});

/// Continues SGD on an existing layer. Returns the per-epoch mean loss.
std::vector<double> run_sgd(AutoencoderLayer& layer, std::span<const std::vector<double>> data,
                            const TrainConfig& config, const EpochCallback& on_epoch = {});

/// sqrt(mean of squared reconstruction residuals over all vectors and components).
double rms_reconstruction_error(const AutoencoderLayer& layer, std::span<const std::vector<double>> data);

} // namespace sae
