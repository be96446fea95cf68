#include "sae/retrieval_index.hpp"

#include "sae/binary_io.hpp"
#include "sae/errors.hpp"
#include "sae/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <unordered_set>

namespace sae {

namespace {

constexpr char kIndexMagic[4] = {'S', 'A', 'E', 'I'};
constexpr std::uint32_t kIndexVersion = 1;
constexpr std::size_t kCodeBytes = 16;

} // namespace

FeatureIndex::FeatureIndex(std::vector<FeatureRecord> records, bool binarized) : binarized_(binarized) {
    if (records.empty())
        throw EmptyIndex("cannot build an index from zero records");
    dim_ = records.front().features.size();
    if (dim_ == 0)
        throw DimensionMismatch("feature vectors must be non-empty");

    std::unordered_set<std::string> seen;
    ids_.reserve(records.size());
    codes_.reserve(records.size());
    features_.reserve(records.size() * dim_);
    for (auto& r : records) {
        if (r.features.size() != dim_)
            throw DimensionMismatch("record '" + r.record_id + "' has dimension " +
                                    std::to_string(r.features.size()) + ", index has " + std::to_string(dim_));
        if (!seen.insert(r.record_id).second)
            throw DuplicateId("duplicate record_id '" + r.record_id + "' in index");
        if (r.record_id.size() > 0xffff)
            throw InvalidConfig("record_id longer than 65535 bytes");
        features_.insert(features_.end(), r.features.begin(), r.features.end());
        ids_.push_back(std::move(r.record_id));
        codes_.push_back(r.code);
    }
}

FeatureIndex build_index(std::vector<FeatureRecord> records, bool binarized) {
    return FeatureIndex(std::move(records), binarized);
}

QueryResult FeatureIndex::knn(std::span<const double> query, std::size_t k) const {
    if (ids_.empty())
        throw EmptyIndex("index is empty");
    if (k == 0)
        throw InvalidConfig("k must be >= 1");
    if (query.size() != dim_)
        throw DimensionMismatch("query has dimension " + std::to_string(query.size()) + ", index has " +
                                std::to_string(dim_));

    std::vector<double> d2(size());
    kernels::squared_distances({features_.data(), size(), dim_}, query, d2);

    std::vector<std::size_t> order(size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const std::size_t take = std::min(k, size());
    const auto closer = [&](std::size_t a, std::size_t b) {
        if (d2[a] != d2[b])
            return d2[a] < d2[b];
        return ids_[a] < ids_[b];
    };
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(), closer);

    QueryResult out;
    out.reserve(take);
    for (std::size_t r = 0; r < take; ++r) {
        const auto i = order[r];
        out.push_back({ids_[i], codes_[i], std::sqrt(d2[i]), i});
    }
    return out;
}

double euclidean(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw DimensionMismatch("euclidean: lengths " + std::to_string(a.size()) + " and " +
                                std::to_string(b.size()) + " differ");
    double acc = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double d = a[j] - b[j];
        acc += d * d;
    }
    return std::sqrt(acc);
}

std::vector<double> binarize(std::span<const double> features, double threshold) {
    std::vector<double> out(features.size());
    std::transform(features.begin(), features.end(), out.begin(),
                   [threshold](double v) { return v >= threshold ? 1.0 : 0.0; });
    return out;
}

// ---------------------------------------------------------------------------
// Persistence

std::vector<std::uint8_t> serialize_index(const FeatureIndex& index) {
    binio::Writer w;
    w.bytes(std::string_view(kIndexMagic, 4));
    w.u32(kIndexVersion);
    w.u32(static_cast<std::uint32_t>(index.size()));
    w.u32(static_cast<std::uint32_t>(index.dim()));
    w.u8(index.binarized() ? 1 : 0);
    for (std::size_t i = 0; i < index.size(); ++i) {
        w.u16(static_cast<std::uint16_t>(index.id(i).size()));
        w.bytes(index.id(i));
        w.bytes(index.code(i).str());
        w.f64s(index.features(i));
    }
    w.seal();
    return w.data();
}

FeatureIndex deserialize_index(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 4 || std::memcmp(bytes.data(), kIndexMagic, 4) != 0)
        throw CorruptIndex("bad magic (not an index file)");
    binio::Reader r(bytes);
    if (!r.verify_and_strip_crc())
        throw CorruptIndex("checksum mismatch or truncated file");
    r.bytes(4);
    const auto version = r.u32();
    if (version != kIndexVersion)
        throw CorruptIndex("unsupported index version " + std::to_string(version));
    const std::size_t count = r.u32();
    const std::size_t dim = r.u32();
    const auto flag = r.u8();
    if (r.truncated() || flag > 1)
        throw CorruptIndex("bad header");

    std::vector<FeatureRecord> records;
    for (std::size_t i = 0; i < count; ++i) {
        FeatureRecord rec;
        const auto id_len = r.u16();
        rec.record_id = r.bytes(id_len);
        const auto code_text = r.bytes(kCodeBytes);
        if (r.truncated() || !r.has(dim * 8))
            throw CorruptIndex("truncated record " + std::to_string(i + 1));
        try {
            rec.code = parse_code(code_text);
        } catch (const MalformedCode& e) {
            throw CorruptIndex("record " + std::to_string(i + 1) + ": " + e.what());
        }
        rec.features.resize(dim);
        r.f64s(rec.features);
        records.push_back(std::move(rec));
    }
    if (r.remaining() != 0)
        throw CorruptIndex("trailing bytes after last record");
    try {
        return FeatureIndex(std::move(records), flag == 1);
    } catch (const CorruptIndex&) {
        throw;
    } catch (const Error& e) {
        throw CorruptIndex(e.what());
    }
}

void save_index(const FeatureIndex& index, const std::filesystem::path& path) {
    binio::write_file(path, serialize_index(index));
}

FeatureIndex load_index(const std::filesystem::path& path) {
    const auto bytes = binio::read_file(path);
    try {
        return deserialize_index(bytes);
    } catch (const CorruptIndex& e) {
        throw CorruptIndex(path.string() + ": " + e.what());
    }
}

} // namespace sae
