#include "sae/dataset.hpp"

#include "sae/csv.hpp"
#include "sae/errors.hpp"
#include "sae/rng.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace sae {

std::string_view split_name(Split s) { return s == Split::Train ? "train" : "test"; }

std::vector<ManifestRecord> load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open manifest " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();

    const auto where = [&](std::size_t line) { return path.string() + ":" + std::to_string(line); };

    std::vector<std::vector<std::string>> rows;
    try {
        rows = csv::parse(buffer.str());
    } catch (const std::invalid_argument& e) {
        throw MalformedManifest(path.string() + ": " + e.what());
    }
    if (rows.empty())
        throw MalformedManifest(where(1) + ": missing header");
    const std::vector<std::string> header{"record_id", "image_path", "irma_code", "split"};
    if (rows[0] != header)
        throw MalformedManifest(where(1) + ": header must be record_id,image_path,irma_code,split");

    const auto base = path.parent_path();
    std::set<std::string, std::less<>> seen;
    std::vector<ManifestRecord> records;
    records.reserve(rows.size() - 1);
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        const std::size_t line = r + 1;
        if (row.size() != 4)
            throw MalformedManifest(where(line) + ": expected 4 fields, got " + std::to_string(row.size()));
        ManifestRecord rec;
        rec.record_id = row[0];
        if (rec.record_id.empty())
            throw MalformedManifest(where(line) + ": empty record_id");
        if (!seen.insert(rec.record_id).second)
            throw MalformedManifest(where(line) + ": duplicate record_id '" + rec.record_id + "'");
        if (row[1].empty())
            throw MalformedManifest(where(line) + ": empty image_path");
        rec.image_path = base / row[1];
        try {
            rec.code = parse_code(row[2]);
        } catch (const MalformedCode& e) {
            throw MalformedManifest(where(line) + ": " + e.what());
        }
        if (row[3] == "train")
            rec.split = Split::Train;
        else if (row[3] == "test")
            rec.split = Split::Test;
        else
            throw MalformedManifest(where(line) + ": unknown split '" + row[3] + "'");
        records.push_back(std::move(rec));
    }
    return records;
}

std::vector<ManifestRecord> select_split(const std::vector<ManifestRecord>& records, Split split) {
    std::vector<ManifestRecord> out;
    std::copy_if(records.begin(), records.end(), std::back_inserter(out),
                 [split](const ManifestRecord& r) { return r.split == split; });
    return out;
}

std::vector<double> luminance(const Image& image) {
    const std::size_t count = image.width * image.height;
    std::vector<double> plane(count);
    if (image.channels == 1) {
        for (std::size_t i = 0; i < count; ++i)
            plane[i] = image.samples[i];
        return plane;
    }
    if (image.channels != 3)
        throw DecodeError("unsupported channel count " + std::to_string(image.channels));
    // Integer weights keep R=G=B exact: (299 + 587 + 114) v / 1000 == v.
    for (std::size_t i = 0; i < count; ++i) {
        const double r = image.samples[3 * i];
        const double g = image.samples[3 * i + 1];
        const double b = image.samples[3 * i + 2];
        plane[i] = (299.0 * r + 587.0 * g + 114.0 * b) / 1000.0;
    }
    return plane;
}

namespace {

struct Tap {
    std::size_t source;
    std::uint64_t weight;
};

// Source index [j, j+1) is scaled by `out` and output index [o, o+1) by
// `in`, so every overlap is an integer and each output's taps sum to `in`.
std::vector<std::vector<Tap>> box_taps(std::size_t in, std::size_t out) {
    std::vector<std::vector<Tap>> taps(out);
    for (std::size_t o = 0; o < out; ++o) {
        const std::uint64_t lo = o * in;
        const std::uint64_t hi = (o + 1) * in;
        for (std::size_t j = lo / out; j < in && j * out < hi; ++j) {
            const std::uint64_t s_lo = j * out;
            const std::uint64_t s_hi = (j + 1) * out;
            const std::uint64_t overlap = std::min(hi, s_hi) - std::max(lo, s_lo);
            if (std::min(hi, s_hi) > std::max(lo, s_lo))
                taps[o].push_back({j, overlap});
        }
    }
    return taps;
}

} // namespace

std::vector<double> box_resample(std::span<const double> plane, std::size_t width, std::size_t height,
                                 std::size_t out_width, std::size_t out_height) {
    if (width == 0 || height == 0 || out_width == 0 || out_height == 0)
        throw DegenerateImage("cannot resample a zero-area image");
    if (plane.size() != width * height)
        throw DimensionMismatch("plane size does not match dimensions");

    const auto xtaps = box_taps(width, out_width);
    const auto ytaps = box_taps(height, out_height);
    const double norm = static_cast<double>(width) * static_cast<double>(height);

    std::vector<double> out(out_width * out_height);
    for (std::size_t oy = 0; oy < out_height; ++oy) {
        for (std::size_t ox = 0; ox < out_width; ++ox) {
            double acc = 0.0;
            for (const auto& ty : ytaps[oy]) {
                const double* row = plane.data() + ty.source * width;
                double row_acc = 0.0;
                for (const auto& tx : xtaps[ox])
                    row_acc += static_cast<double>(tx.weight) * row[tx.source];
                acc += static_cast<double>(ty.weight) * row_acc;
            }
            out[oy * out_width + ox] = acc / norm;
        }
    }
    return out;
}

std::vector<double> preprocess(const Image& image) {
    if (image.width == 0 || image.height == 0)
        throw DegenerateImage("image has zero area");
    if (image.samples.size() != image.width * image.height * image.channels)
        throw DecodeError("sample buffer does not match image dimensions");
    const auto plane = luminance(image);
    auto out = box_resample(plane, image.width, image.height, kImageSide, kImageSide);
    const double max_value = image.max_value;
    for (auto& v : out)
        v = std::clamp(v / max_value, 0.0, 1.0);
    return out;
}

Corpus load_corpus(const std::vector<ManifestRecord>& records) {
    Corpus corpus;
    const std::size_t n = records.size();
    corpus.ids.resize(n);
    corpus.codes.resize(n);
    corpus.vectors.resize(n);
    std::vector<std::exception_ptr> failures(n);

#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
        const auto& rec = records[i];
        try {
            corpus.vectors[i] = preprocess(read_image(rec.image_path));
        } catch (...) {
            failures[i] = std::current_exception();
        }
        corpus.ids[i] = rec.record_id;
        corpus.codes[i] = rec.code;
    }
    for (const auto& f : failures)
        if (f)
            std::rethrow_exception(f);
    return corpus;
}

// ---------------------------------------------------------------------------
// Synthetic corpus

namespace {

std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

enum class Shape { Rectangle, Disk, Cross, Ring };

struct ClassPattern {
    Shape shape;
    double cx, cy;   // fraction of the side
    double size;     // half-extent, fraction of the side
    double level;    // foreground gray level
};

// Shapes cycle with the class index; placement walks a low-discrepancy
// sequence so neighbouring classes land in different parts of the frame.
ClassPattern class_pattern(std::size_t c) {
    constexpr double kGolden = 0.6180339887498949;
    constexpr double kSilver = 0.4142135623730950;
    ClassPattern p;
    p.shape = static_cast<Shape>(c % 4);
    p.cx = 0.25 + 0.5 * std::fmod(0.5 + c * kGolden, 1.0);
    p.cy = 0.25 + 0.5 * std::fmod(0.3 + c * kSilver, 1.0);
    p.size = 0.12 + 0.1 * std::fmod(c * 0.7548776662466927, 1.0);
    p.level = 170.0 + 70.0 * std::fmod(c * 0.5698402909980532, 1.0);
    return p;
}

bool inside(Shape shape, double dx, double dy, double half) {
    switch (shape) {
    case Shape::Rectangle:
        return std::abs(dx) <= half && std::abs(dy) <= 0.6 * half;
    case Shape::Disk:
        return dx * dx + dy * dy <= half * half;
    case Shape::Cross:
        return (std::abs(dx) <= half && std::abs(dy) <= 0.25 * half) ||
               (std::abs(dy) <= half && std::abs(dx) <= 0.25 * half);
    case Shape::Ring: {
        const double r2 = dx * dx + dy * dy;
        return r2 <= half * half && r2 >= 0.45 * half * half;
    }
    }
    return false;
}

} // namespace

IrmaCode synthetic_class_code(std::size_t index) {
    if (index >= 1000)
        throw InvalidConfig("synthetic corpora support at most 1000 classes");
    std::string d;
    d += static_cast<char>('0' + index % 10);
    d += static_cast<char>('0' + (index / 10) % 10);
    d += static_cast<char>('0' + (index / 100) % 10);
    const std::string a(1, static_cast<char>('1' + (index % 4)));
    return parse_code("1121-" + d + "-" + a + "00-700");
}

std::vector<std::uint8_t> render_synthetic_image(std::size_t class_index, std::size_t side,
                                                 std::uint64_t image_seed) {
    Rng rng(image_seed);
    const auto pattern = class_pattern(class_index);
    const double s = static_cast<double>(side);
    const double cx = pattern.cx * s + rng.uniform(-0.04, 0.04) * s;
    const double cy = pattern.cy * s + rng.uniform(-0.04, 0.04) * s;
    const double half = pattern.size * s * rng.uniform(0.9, 1.1);
    const double level = pattern.level + rng.uniform(-10.0, 10.0);
    const double background = 25.0 + rng.uniform(-5.0, 5.0);

    std::vector<std::uint8_t> pixels(side * side);
    for (std::size_t y = 0; y < side; ++y) {
        for (std::size_t x = 0; x < side; ++x) {
            const double dx = x + 0.5 - cx;
            const double dy = y + 0.5 - cy;
            double v = inside(pattern.shape, dx, dy, half) ? level : background;
            v += rng.uniform(-12.0, 12.0);
            pixels[y * side + x] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
        }
    }
    return pixels;
}

std::vector<ManifestRecord> generate_synthetic_corpus(const SyntheticSpec& spec,
                                                      const std::filesystem::path& out_dir) {
    if (spec.n_classes < 2)
        throw InvalidConfig("synthetic corpus needs at least 2 classes");
    if (spec.image_side == 0)
        throw InvalidConfig("synthetic image side must be >= 1");
    // Validates the class count limit up front.
    synthetic_class_code(spec.n_classes - 1);

    std::error_code ec;
    for (auto split : {Split::Train, Split::Test}) {
        std::filesystem::create_directories(out_dir / "corpus" / std::string(split_name(split)), ec);
        if (ec)
            throw IoError("cannot create " + (out_dir / "corpus").string() + ": " + ec.message());
    }

    const auto manifest_path = out_dir / "manifest.csv";
    std::ofstream manifest(manifest_path, std::ios::binary);
    if (!manifest)
        throw IoError("cannot write " + manifest_path.string());
    csv::write_row(manifest, {"record_id", "image_path", "irma_code", "split"});

    for (auto split : {Split::Train, Split::Test}) {
        const std::size_t count = split == Split::Train ? spec.n_train : spec.n_test;
        const std::string name(split_name(split));
        for (std::size_t i = 0; i < count; ++i) {
            char id[32];
            std::snprintf(id, sizeof id, "%s_%05zu", name.c_str(), i);
            const std::size_t cls = i % spec.n_classes;
            const std::uint64_t image_seed =
                mix(spec.seed ^ mix((split == Split::Train ? 0x1000000ULL : 0x2000000ULL) + i));
            const auto pixels = render_synthetic_image(cls, spec.image_side, image_seed);
            const auto rel = std::filesystem::path("corpus") / name / (std::string(id) + ".png");
            write_png_gray8(out_dir / rel, spec.image_side, spec.image_side, pixels);
            csv::write_row(manifest, {id, rel.generic_string(), synthetic_class_code(cls).str(), name});
        }
    }
    manifest.close();
    if (!manifest)
        throw IoError("failed writing " + manifest_path.string());

    const auto taxonomy_path = out_dir / "taxonomy.txt";
    std::ofstream taxonomy(taxonomy_path, std::ios::binary);
    taxonomy << "# synthetic corpus: every position has 10 possible labels\nuniform:10\n";
    if (!taxonomy)
        throw IoError("failed writing " + taxonomy_path.string());

    return load_manifest(manifest_path);
}

CorpusStats corpus_stats(const std::vector<ManifestRecord>& records) {
    CorpusStats stats;
    for (const auto& r : records)
        ++(r.split == Split::Train ? stats.train : stats.test)[r.code.str()];
    return stats;
}

void write_stats_csv(std::ostream& out, const CorpusStats& stats) {
    csv::write_row(out, {"split", "code", "count"});
    for (const auto& [code, count] : stats.train)
        csv::write_row(out, {"train", code, std::to_string(count)});
    for (const auto& [code, count] : stats.test)
        csv::write_row(out, {"test", code, std::to_string(count)});
}

} // namespace sae
