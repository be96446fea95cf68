#pragma once

#include "sae/image.hpp"
#include "sae/irma_code.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace sae {

inline constexpr std::size_t kImageSide = 32;
inline constexpr std::size_t kPixelCount = kImageSide * kImageSide;

enum class Split { Train, Test };

std::string_view split_name(Split s);

struct ManifestRecord {
    std::string record_id;
    std::filesystem::path image_path;  ///< resolved against the manifest directory
    IrmaCode code;
    Split split = Split::Train;
};

/// Reads `record_id,image_path,irma_code,split`. Errors carry the CSV line.
std::vector<ManifestRecord> load_manifest(const std::filesystem::path& path);

std::vector<ManifestRecord> select_split(const std::vector<ManifestRecord>& records, Split split);

/// Per-pixel luminance, 0.299 R + 0.587 G + 0.114 B, in source units.
/// Gray rasters pass through unchanged.
std::vector<double> luminance(const Image& image);

/// Gray-scale, box-filter resample to 32x32, divide by the source's maximum
/// representable value, flatten row-major. Output has 1024 values in [0, 1].
std::vector<double> preprocess(const Image& image);

/// Area-averaging resample of a single-channel plane. Works for both
/// shrinking and enlarging; weights are exact integer overlaps.
std::vector<double> box_resample(std::span<const double> plane, std::size_t width, std::size_t height,
                                 std::size_t out_width, std::size_t out_height);

/// Decoded and preprocessed records of one split, in manifest order.
struct Corpus {
    std::vector<std::string> ids;
    std::vector<IrmaCode> codes;
    std::vector<std::vector<double>> vectors;

    std::size_t size() const { return ids.size(); }
};

/// Decodes and preprocesses every record; images are processed in parallel.
Corpus load_corpus(const std::vector<ManifestRecord>& records);

struct SyntheticSpec {
    std::uint64_t seed = 7;
    std::size_t n_train = 100;
    std::size_t n_test = 20;
    std::size_t n_classes = 5;
    std::size_t image_side = 64;
};

/// Writes `corpus/<split>/<id>.png`, `manifest.csv` and `taxonomy.txt`
/// under `out_dir`. Record i of each split belongs to class i mod n_classes.
/// Everything is a pure function of the spec.
std::vector<ManifestRecord> generate_synthetic_corpus(const SyntheticSpec& spec,
                                                      const std::filesystem::path& out_dir);

/// Synthetic code assigned to class `index`.
IrmaCode synthetic_class_code(std::size_t index);

/// The raster for one synthetic image, 8-bit gray, row-major.
std::vector<std::uint8_t> render_synthetic_image(std::size_t class_index, std::size_t side,
                                                 std::uint64_t image_seed);

struct CorpusStats {
    std::map<std::string, std::size_t> train;
    std::map<std::string, std::size_t> test;
};

CorpusStats corpus_stats(const std::vector<ManifestRecord>& records);

/// `split,code,count`; train first, codes ascending.
void write_stats_csv(std::ostream& out, const CorpusStats& stats);

} // namespace sae
