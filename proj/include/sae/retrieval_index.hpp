#pragma once

#include "sae/irma_code.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace sae {

struct FeatureRecord {
    std::string record_id;
    IrmaCode code;
    std::vector<double> features;
};

struct Neighbor {
    std::string record_id;
    IrmaCode code;
    double distance = 0.0;
    std::size_t position = 0;  ///< row in the index

    friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// Ascending by distance, ties by record_id.
using QueryResult = std::vector<Neighbor>;

/// Exact Euclidean k-NN over an immutable set of feature vectors.
///
/// Vectors are stored contiguously and scanned in full for every query.
/// Ranking uses squared distances; only reported distances are rooted.
class FeatureIndex {
public:
    FeatureIndex() = default;

    /// Throws EmptyIndex, DimensionMismatch or DuplicateId.
    explicit FeatureIndex(std::vector<FeatureRecord> records, bool binarized = false);

    std::size_t size() const { return ids_.size(); }
    std::size_t dim() const { return dim_; }
    bool binarized() const { return binarized_; }

    const std::string& id(std::size_t i) const { return ids_[i]; }
    const IrmaCode& code(std::size_t i) const { return codes_[i]; }
    std::span<const double> features(std::size_t i) const {
        return {features_.data() + i * dim_, dim_};
    }

    /// Throws EmptyIndex on an empty index, DimensionMismatch on a bad query
    /// and InvalidConfig when k == 0. Returns min(k, size()) neighbors.
    QueryResult knn(std::span<const double> query, std::size_t k) const;

    friend bool operator==(const FeatureIndex&, const FeatureIndex&) = default;

private:
    std::vector<std::string> ids_;
    std::vector<IrmaCode> codes_;
    std::vector<double> features_;
    std::size_t dim_ = 0;
    bool binarized_ = false;
};

FeatureIndex build_index(std::vector<FeatureRecord> records, bool binarized = false);

double euclidean(std::span<const double> a, std::span<const double> b);

/// 1 where value >= threshold, else 0.
std::vector<double> binarize(std::span<const double> features, double threshold = 0.5);

/// Index file: "SAEI", u32 version 1, u32 record count, u32 dim,
/// u8 binarized flag; per record u16 id length, UTF-8 id, 16-byte canonical
/// code, dim f64 features; trailing CRC32. All little-endian.
std::vector<std::uint8_t> serialize_index(const FeatureIndex& index);
FeatureIndex deserialize_index(std::span<const std::uint8_t> bytes);

void save_index(const FeatureIndex& index, const std::filesystem::path& path);
FeatureIndex load_index(const std::filesystem::path& path);

} // namespace sae
