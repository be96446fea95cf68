#include "sae/stacked_encoder.hpp"

#include "sae/binary_io.hpp"
#include "sae/errors.hpp"

#include <charconv>
#include <cmath>
#include <cstring>
#include <exception>
#include <numeric>

namespace sae {

namespace {

constexpr char kModelMagic[4] = {'S', 'A', 'E', 'M'};
constexpr std::uint32_t kModelVersion = 1;

double sum_squared_residuals(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double d = a[j] - b[j];
        acc += d * d;
    }
    return acc;
}

} // namespace

StackedEncoder::StackedEncoder(std::vector<AutoencoderLayer> layers) : layers_(std::move(layers)) {
    if (layers_.empty())
        throw InvalidArchitecture("a stack needs at least one layer");
    for (std::size_t k = 1; k < layers_.size(); ++k)
        if (layers_[k].input_dim() != layers_[k - 1].hidden_dim())
            throw InvalidArchitecture("layer " + std::to_string(k + 1) + " expects " +
                                      std::to_string(layers_[k].input_dim()) + " inputs but layer " +
                                      std::to_string(k) + " produces " + std::to_string(layers_[k - 1].hidden_dim()));
}

std::string StackedEncoder::architecture() const {
    std::string out;
    for (const auto& l : layers_) {
        if (!out.empty())
            out += ", ";
        const auto n = std::to_string(l.input_dim());
        out += n + "/" + std::to_string(l.hidden_dim()) + "/" + n;
    }
    return out;
}

std::vector<std::size_t> parse_dims(std::string_view text) {
    std::vector<std::size_t> dims;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find(',', start);
        if (end == std::string_view::npos)
            end = text.size();
        auto item = text.substr(start, end - start);
        while (!item.empty() && item.front() == ' ')
            item.remove_prefix(1);
        while (!item.empty() && item.back() == ' ')
            item.remove_suffix(1);
        std::size_t v = 0;
        auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
        if (item.empty() || ec != std::errc{} || ptr != item.data() + item.size())
            throw InvalidArchitecture("invalid layer dimension '" + std::string(item) + "' in '" +
                                      std::string(text) + "'");
        dims.push_back(v);
        start = end + 1;
    }
    validate_dims(dims);
    return dims;
}

void validate_dims(std::span<const std::size_t> dims) {
    if (dims.size() < 2)
        throw InvalidArchitecture("architecture needs at least an input and one hidden size");
    for (std::size_t k = 0; k < dims.size(); ++k) {
        if (dims[k] == 0)
            throw InvalidArchitecture("layer dimensions must be >= 1");
        if (k > 0 && dims[k] >= dims[k - 1])
            throw InvalidArchitecture("layer dimensions must be strictly decreasing (" +
                                      std::to_string(dims[k - 1]) + " -> " + std::to_string(dims[k]) + ")");
    }
}

StackTrainResult train_stack(std::span<const std::vector<double>> data, std::span<const std::size_t> dims,
                             const TrainConfig& config, std::span<const TrainConfig> overrides,
                             const StackEpochCallback& on_epoch) {
    validate_dims(dims);
    const std::size_t layer_count = dims.size() - 1;
    if (!overrides.empty() && overrides.size() != layer_count)
        throw InvalidConfig("per-layer config list has " + std::to_string(overrides.size()) + " entries for " +
                            std::to_string(layer_count) + " layers");
    if (data.empty())
        throw DimensionMismatch("training data is empty");

    StackTrainResult result;
    std::vector<AutoencoderLayer> layers;
    std::vector<std::vector<double>> latents;
    std::span<const std::vector<double>> current = data;

    for (std::size_t k = 0; k < layer_count; ++k) {
        TrainConfig cfg = overrides.empty() ? config : overrides[k];
        if (overrides.empty())
            cfg.seed = config.seed + k;
        EpochCallback layer_callback;
        if (on_epoch)
            layer_callback = [&on_epoch, k](std::size_t epoch, double loss) { on_epoch(k, epoch, loss); };
        auto [layer, report] = train_layer(current, dims[k], dims[k + 1], cfg, layer_callback);
        if (k + 1 < layer_count) {
            latents = encode_features_batch(StackedEncoder({layer}), current);
            current = latents;
        }
        layers.push_back(std::move(layer));
        result.reports.push_back(std::move(report));
    }
    result.stack = StackedEncoder(std::move(layers));
    return result;
}

std::vector<double> encode_features(const StackedEncoder& stack, std::span<const double> x) {
    if (x.size() != stack.input_dim())
        throw DimensionMismatch("feature input has length " + std::to_string(x.size()) + ", model expects " +
                                std::to_string(stack.input_dim()));
    std::vector<double> h(x.begin(), x.end());
    for (const auto& layer : stack.layers())
        h = encode(layer, h);
    return h;
}

std::vector<std::vector<double>> encode_features_batch(const StackedEncoder& stack,
                                                       std::span<const std::vector<double>> xs) {
    std::vector<std::vector<double>> out(xs.size());
    std::vector<std::exception_ptr> failures(xs.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(xs.size()); ++i) {
        try {
            out[i] = encode_features(stack, xs[i]);
        } catch (...) {
            failures[i] = std::current_exception();
        }
    }
    for (const auto& f : failures)
        if (f)
            std::rethrow_exception(f);
    return out;
}

double compression_percent(std::size_t input_dim, std::size_t feature_dim) {
    return 100.0 * (1.0 - static_cast<double>(feature_dim) / static_cast<double>(input_dim));
}

double compression_percent(const StackedEncoder& stack) {
    return compression_percent(stack.input_dim(), stack.feature_dim());
}

double round2(double value) { return std::round(value * 100.0) / 100.0; }

double first_layer_rms(const StackedEncoder& stack, std::span<const std::vector<double>> data) {
    return rms_reconstruction_error(stack.layers().front(), data);
}

double full_unroll_rms(const StackedEncoder& stack, std::span<const std::vector<double>> data) {
    if (data.empty())
        throw DimensionMismatch("reconstruction data is empty");
    std::vector<double> per_vector(data.size());
    std::vector<std::exception_ptr> failures(data.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(data.size()); ++r) {
        try {
            auto h = encode_features(stack, data[r]);
            for (auto it = stack.layers().rbegin(); it != stack.layers().rend(); ++it)
                h = decode(*it, h);
            per_vector[r] = sum_squared_residuals(h, data[r]);
        } catch (...) {
            failures[r] = std::current_exception();
        }
    }
    for (const auto& f : failures)
        if (f)
            std::rethrow_exception(f);
    const double total = std::accumulate(per_vector.begin(), per_vector.end(), 0.0);
    return std::sqrt(total / static_cast<double>(data.size() * stack.input_dim()));
}

// ---------------------------------------------------------------------------
// Persistence

std::vector<std::uint8_t> serialize_model(const StackedEncoder& stack) {
    binio::Writer w;
    w.bytes(std::string_view(kModelMagic, 4));
    w.u32(kModelVersion);
    w.u32(static_cast<std::uint32_t>(stack.layers().size()));
    for (const auto& layer : stack.layers()) {
        w.u32(static_cast<std::uint32_t>(layer.input_dim()));
        w.u32(static_cast<std::uint32_t>(layer.hidden_dim()));
        w.f64s(layer.weights());
        w.f64s(layer.enc_bias());
        w.f64s(layer.dec_bias());
    }
    w.seal();
    return w.data();
}

StackedEncoder deserialize_model(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 4 || std::memcmp(bytes.data(), kModelMagic, 4) != 0)
        throw CorruptModel("bad magic (not a model file)");
    binio::Reader r(bytes);
    if (!r.verify_and_strip_crc())
        throw CorruptModel("checksum mismatch or truncated file");
    r.bytes(4);
    const auto version = r.u32();
    if (version != kModelVersion)
        throw CorruptModel("unsupported model version " + std::to_string(version));
    const auto count = r.u32();
    if (r.truncated() || count == 0)
        throw CorruptModel("missing layers");

    std::vector<AutoencoderLayer> layers;
    for (std::uint32_t k = 0; k < count; ++k) {
        const std::size_t n = r.u32();
        const std::size_t p = r.u32();
        if (r.truncated() || n == 0 || p == 0)
            throw CorruptModel("bad header for layer " + std::to_string(k + 1));
        if (!r.has((n * p + n + p) * 8))
            throw CorruptModel("truncated parameters for layer " + std::to_string(k + 1));
        std::vector<double> weights(n * p), enc(p), dec(n);
        r.f64s(weights);
        r.f64s(enc);
        r.f64s(dec);
        layers.emplace_back(n, p, std::move(weights), std::move(enc), std::move(dec));
    }
    if (r.remaining() != 0)
        throw CorruptModel("trailing bytes after last layer");
    try {
        return StackedEncoder(std::move(layers));
    } catch (const InvalidArchitecture& e) {
        throw CorruptModel(e.what());
    }
}

void save_model(const StackedEncoder& stack, const std::filesystem::path& path) {
    binio::write_file(path, serialize_model(stack));
}

StackedEncoder load_model(const std::filesystem::path& path) {
    const auto bytes = binio::read_file(path);
    try {
        return deserialize_model(bytes);
    } catch (const CorruptModel& e) {
        throw CorruptModel(path.string() + ": " + e.what());
    }
}

} // namespace sae
