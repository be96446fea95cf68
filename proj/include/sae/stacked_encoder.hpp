#pragma once

#include "sae/autoencoder.hpp"

#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sae {

/// Greedily trained autoencoders applied in sequence; the last hidden layer
/// is the feature vector.
class StackedEncoder {
public:
    StackedEncoder() = default;

    /// Throws InvalidArchitecture if the list is empty or a layer's input
    /// does not match the previous layer's hidden size.
    explicit StackedEncoder(std::vector<AutoencoderLayer> layers);

    const std::vector<AutoencoderLayer>& layers() const { return layers_; }
    std::size_t input_dim() const { return layers_.front().input_dim(); }
    std::size_t feature_dim() const { return layers_.back().hidden_dim(); }

    /// e.g. "1024/600/1024, 600/500/600, 500/260/500".
    std::string architecture() const;

    friend bool operator==(const StackedEncoder&, const StackedEncoder&) = default;

private:
    std::vector<AutoencoderLayer> layers_;
};

struct StackTrainResult {
    StackedEncoder stack;
    std::vector<TrainReport> reports;  ///< one per layer
};

/// Parses "1024,600,500,260". Requires >= 2 strictly decreasing entries.
std::vector<std::size_t> parse_dims(std::string_view text);

void validate_dims(std::span<const std::size_t> dims);

/// Receives the 0-based layer, epoch and epoch-mean loss.
using StackEpochCallback = std::function<void(std::size_t layer, std::size_t epoch, double mean_loss)>;

/// Trains layer k on the latents of layers 0..k-1 with seed `config.seed + k`.
/// `overrides`, when non-empty, supplies one config per layer instead.
StackTrainResult train_stack(std::span<const std::vector<double>> data, std::span<const std::size_t> dims,
                             const TrainConfig& config, std::span<const TrainConfig> overrides = {},
                             const StackEpochCallback& on_epoch = {});

std::vector<double> encode_features(const StackedEncoder& stack, std::span<const double> x);

/// encode_features for many inputs, parallel across inputs.
std::vector<std::vector<double>> encode_features_batch(const StackedEncoder& stack,
                                                       std::span<const std::vector<double>> xs);

/// 100 (1 - feature_dim / input_dim).
double compression_percent(const StackedEncoder& stack);
double compression_percent(std::size_t input_dim, std::size_t feature_dim);

/// Two-decimal display rounding, e.g. 74.609375 -> 74.61.
double round2(double value);

/// RMS of the first layer's own reconstruction (the reported convention for stacks).
double first_layer_rms(const StackedEncoder& stack, std::span<const std::vector<double>> data);

/// RMS after encoding through every layer and decoding back through all of them.
double full_unroll_rms(const StackedEncoder& stack, std::span<const std::vector<double>> data);

/// Model file: "SAEM", u32 version 1, u32 layer count, per layer u32 n,
/// u32 p, W (p*n f64 row-major), b_enc (p), b_dec (n); trailing CRC32.
/// All little-endian.
std::vector<std::uint8_t> serialize_model(const StackedEncoder& stack);
StackedEncoder deserialize_model(std::span<const std::uint8_t> bytes);

void save_model(const StackedEncoder& stack, const std::filesystem::path& path);
StackedEncoder load_model(const std::filesystem::path& path);

} // namespace sae
