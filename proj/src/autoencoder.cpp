#include "sae/autoencoder.hpp"

#include "sae/errors.hpp"
#include "sae/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <string>

namespace sae {

namespace {

void require_length(std::span<const double> v, std::size_t expected, const char* what) {
    if (v.size() != expected)
        throw DimensionMismatch(std::string(what) + " has length " + std::to_string(v.size()) +
                                ", expected " + std::to_string(expected));
}

// Shuffle stream is kept apart from the initialization stream.
constexpr std::uint64_t kShuffleSalt = 0x5deece66dULL;

// Reusable buffers for one minibatch: rows are batch members.
struct BatchWorkspace {
    std::vector<double> x, hidden, recon, out_delta, hid_delta;

    void resize(std::size_t batch, std::size_t n, std::size_t p) {
        x.resize(batch * n);
        hidden.resize(batch * p);
        recon.resize(batch * n);
        out_delta.resize(batch * n);
        hid_delta.resize(batch * p);
    }
};

// Forward and backward pass over `members`, writing batch-mean gradients
// into `grad`. Returns the batch-mean loss.
double accumulate_gradients(const AutoencoderLayer& layer, std::span<const std::vector<double>> data,
                            std::span<const std::size_t> members, BatchWorkspace& ws, Gradients& grad) {
    const std::size_t n = layer.input_dim();
    const std::size_t p = layer.hidden_dim();
    const std::size_t batch = members.size();
    ws.resize(batch, n, p);
    const auto w = layer.weight_matrix();

    double loss = 0.0;
    for (std::size_t b = 0; b < batch; ++b) {
        const auto& sample = data[members[b]];
        require_length(sample, n, "training vector");
        std::span<double> x(ws.x.data() + b * n, n);
        std::span<double> h(ws.hidden.data() + b * p, p);
        std::span<double> y(ws.recon.data() + b * n, n);
        std::span<double> dy(ws.out_delta.data() + b * n, n);
        std::span<double> dh(ws.hid_delta.data() + b * p, p);

        std::copy(sample.begin(), sample.end(), x.begin());
        kernels::affine_sigmoid(w, x, layer.enc_bias(), h);
        kernels::affine_sigmoid_transposed(w, h, layer.dec_bias(), y);
        loss += cross_entropy(x, y);

        for (std::size_t j = 0; j < n; ++j)
            dy[j] = y[j] - x[j];
        kernels::matvec(w, dy, dh);
        for (std::size_t i = 0; i < p; ++i)
            dh[i] *= h[i] * (1.0 - h[i]);
    }

    grad.weights.resize(p * n);
    kernels::tied_weight_gradient({ws.hid_delta.data(), batch, p}, {ws.x.data(), batch, n},
                                  {ws.hidden.data(), batch, p}, {ws.out_delta.data(), batch, n},
                                  {grad.weights.data(), p, n});
    grad.enc_bias.assign(p, 0.0);
    grad.dec_bias.assign(n, 0.0);
    for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t i = 0; i < p; ++i)
            grad.enc_bias[i] += ws.hid_delta[b * p + i];
        for (std::size_t j = 0; j < n; ++j)
            grad.dec_bias[j] += ws.out_delta[b * n + j];
    }

    const double scale = 1.0 / static_cast<double>(batch);
    for (auto& g : grad.weights)
        g *= scale;
    for (auto& g : grad.enc_bias)
        g *= scale;
    for (auto& g : grad.dec_bias)
        g *= scale;
    grad.mean_loss = loss * scale;
    return grad.mean_loss;
}

} // namespace

AutoencoderLayer::AutoencoderLayer(std::size_t n, std::size_t p)
    : AutoencoderLayer(n, p, std::vector<double>(n * p, 0.0), std::vector<double>(p, 0.0),
                       std::vector<double>(n, 0.0)) {}

AutoencoderLayer::AutoencoderLayer(std::size_t n, std::size_t p, std::vector<double> weights,
                                   std::vector<double> enc_bias, std::vector<double> dec_bias)
    : n_(n), p_(p), weights_(std::move(weights)), enc_bias_(std::move(enc_bias)), dec_bias_(std::move(dec_bias)) {
    if (n == 0 || p == 0)
        throw InvalidDimensions("layer dimensions must be >= 1 (got " + std::to_string(n) + "/" +
                                std::to_string(p) + ")");
    if (weights_.size() != n * p || enc_bias_.size() != p || dec_bias_.size() != n)
        throw InvalidDimensions("layer parameter sizes do not match " + std::to_string(n) + "/" +
                                std::to_string(p));
}

void TrainConfig::validate() const {
    if (epochs < 1)
        throw InvalidConfig("epochs must be >= 1");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
        throw InvalidConfig("learning rate must be a positive finite number");
    if (batch_size < 1)
        throw InvalidConfig("batch size must be >= 1");
}

AutoencoderLayer init_layer(std::size_t n, std::size_t p, std::uint64_t seed) {
    AutoencoderLayer layer(n, p);
    const double bound = 4.0 * std::sqrt(6.0 / static_cast<double>(n + p));
    Rng rng(seed);
    for (auto& w : layer.weights())
        w = rng.uniform(-bound, bound);
    return layer;
}

std::vector<double> encode(const AutoencoderLayer& layer, std::span<const double> x) {
    require_length(x, layer.input_dim(), "encoder input");
    std::vector<double> h(layer.hidden_dim());
    kernels::affine_sigmoid(layer.weight_matrix(), x, layer.enc_bias(), h);
    return h;
}

std::vector<double> decode(const AutoencoderLayer& layer, std::span<const double> h) {
    require_length(h, layer.hidden_dim(), "decoder input");
    std::vector<double> y(layer.input_dim());
    kernels::affine_sigmoid_transposed(layer.weight_matrix(), h, layer.dec_bias(), y);
    return y;
}

std::vector<double> reconstruct(const AutoencoderLayer& layer, std::span<const double> x) {
    return decode(layer, encode(layer, x));
}

double cross_entropy(std::span<const double> x, std::span<const double> reconstruction) {
    require_length(reconstruction, x.size(), "reconstruction");
    constexpr double kEps = 1e-12;
    double loss = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double y = std::clamp(reconstruction[j], kEps, 1.0 - kEps);
        loss -= x[j] * std::log(y) + (1.0 - x[j]) * std::log(1.0 - y);
    }
    return loss;
}

Gradients gradients(const AutoencoderLayer& layer, std::span<const std::vector<double>> batch) {
    if (batch.empty())
        throw DimensionMismatch("gradient batch is empty");
    std::vector<std::size_t> members(batch.size());
    std::iota(members.begin(), members.end(), std::size_t{0});
    BatchWorkspace ws;
    Gradients grad;
    accumulate_gradients(layer, batch, members, ws, grad);
    return grad;
}

std::vector<double> run_sgd(AutoencoderLayer& layer, std::span<const std::vector<double>> data,
                            const TrainConfig& config, const EpochCallback& on_epoch) {
    config.validate();
    if (data.empty())
        throw DimensionMismatch("training data is empty");
    for (const auto& v : data)
        require_length(v, layer.input_dim(), "training vector");

    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffler(config.seed ^ kShuffleSalt);
    BatchWorkspace ws;
    Gradients grad;
    std::vector<double> epoch_loss;
    epoch_loss.reserve(config.epochs);

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        if (config.shuffle)
            shuffler.shuffle(std::span<std::size_t>(order));
        double loss_sum = 0.0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t len = std::min(config.batch_size, order.size() - start);
            const std::span<const std::size_t> members(order.data() + start, len);
            loss_sum += accumulate_gradients(layer, data, members, ws, grad) * static_cast<double>(len);

            const double lr = config.learning_rate;
            auto w = layer.weights();
            for (std::size_t k = 0; k < w.size(); ++k)
                w[k] -= lr * grad.weights[k];
            auto be = layer.enc_bias();
            for (std::size_t k = 0; k < be.size(); ++k)
                be[k] -= lr * grad.enc_bias[k];
            auto bd = layer.dec_bias();
            for (std::size_t k = 0; k < bd.size(); ++k)
                bd[k] -= lr * grad.dec_bias[k];
        }
        epoch_loss.push_back(loss_sum / static_cast<double>(order.size()));
        if (on_epoch)
            on_epoch(epoch, epoch_loss.back());
    }
    return epoch_loss;
}

std::pair<AutoencoderLayer, TrainReport> train_layer(std::span<const std::vector<double>> data,
                                                     std::size_t n, std::size_t p, const TrainConfig& config,
                                                     const EpochCallback& on_epoch) {
    config.validate();
    const auto started = std::chrono::steady_clock::now();
    auto layer = init_layer(n, p, config.seed);
    TrainReport report;
    report.epoch_loss = run_sgd(layer, data, config, on_epoch);
    report.train_rms = rms_reconstruction_error(layer, data);
    report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return {std::move(layer), std::move(report)};
}

double rms_reconstruction_error(const AutoencoderLayer& layer, std::span<const std::vector<double>> data) {
    if (data.empty())
        throw DimensionMismatch("reconstruction data is empty");
    const std::size_t n = layer.input_dim();
    std::vector<double> per_vector(data.size());
    for (std::size_t r = 0; r < data.size(); ++r) {
        const auto y = reconstruct(layer, data[r]);
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double d = y[j] - data[r][j];
            acc += d * d;
        }
        per_vector[r] = acc;
    }
    const double total = std::accumulate(per_vector.begin(), per_vector.end(), 0.0);
    return std::sqrt(total / static_cast<double>(data.size() * n));
}

} // namespace sae
