#include "sae/dataset.hpp"
#include "sae/errors.hpp"
#include "sae/image.hpp"

#include "test_support.hpp"

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

using namespace sae;

namespace {

Image gray_image(std::size_t w, std::size_t h, std::uint16_t value, std::uint32_t max_value = 255) {
    Image img;
    img.width = w;
    img.height = h;
    img.channels = 1;
    img.max_value = max_value;
    img.samples.assign(w * h, value);
    return img;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

double distance(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        acc += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(acc);
}

} // namespace

TEST_SUITE("dataset") {

TEST_CASE("load_manifest") {
    testing::TempDir dir("manifest");
    const std::string header = "record_id,image_path,irma_code,split\n";

    SUBCASE("valid rows resolve paths against the manifest directory") {
        std::ofstream(dir / "m.csv") << header << "a,img/a.png,1121-127-700-500,train\n"
                                     << "b,img/b.png,1121-120-942-700,test\r\n"
                                     << "\"c,1\",\"img/c, d.png\",112d-121-500-000,train\n";
        const auto recs = load_manifest(dir / "m.csv");
        REQUIRE(recs.size() == 3);
        CHECK(recs[0].record_id == "a");
        CHECK(recs[0].image_path == dir.path() / "img/a.png");
        CHECK(recs[1].split == Split::Test);
        CHECK(recs[2].record_id == "c,1");
        CHECK(recs[2].code.str() == "112d-121-500-000");
        CHECK(select_split(recs, Split::Train).size() == 2);
    }
    SUBCASE("duplicate id names the line") {
        std::ofstream(dir / "m.csv") << header << "a,a.png,1121-127-700-500,train\n"
                                     << "a,b.png,1121-127-700-500,test\n";
        CHECK_THROWS_WITH_AS(load_manifest(dir / "m.csv"), doctest::Contains("m.csv:3"), MalformedManifest);
    }
    SUBCASE("bad code wraps the code error") {
        std::ofstream(dir / "m.csv") << header << "a,a.png,999,train\n";
        CHECK_THROWS_WITH_AS(load_manifest(dir / "m.csv"), doctest::Contains("axes"), MalformedManifest);
    }
    SUBCASE("other malformations") {
        std::ofstream(dir / "split.csv") << header << "a,a.png,1121-127-700-500,validation\n";
        CHECK_THROWS_AS(load_manifest(dir / "split.csv"), MalformedManifest);
        std::ofstream(dir / "header.csv") << "id,path,code,split\n";
        CHECK_THROWS_AS(load_manifest(dir / "header.csv"), MalformedManifest);
        std::ofstream(dir / "fields.csv") << header << "a,a.png,1121-127-700-500\n";
        CHECK_THROWS_AS(load_manifest(dir / "fields.csv"), MalformedManifest);
        std::ofstream(dir / "quote.csv") << header << "\"a,a.png,1121-127-700-500,train\n";
        CHECK_THROWS_AS(load_manifest(dir / "quote.csv"), MalformedManifest);
        CHECK_THROWS_AS(load_manifest(dir / "missing.csv"), IoError);
    }
}

TEST_CASE("preprocess fixtures") {
    SUBCASE("constant mid-gray survives resampling") {
        const auto v = preprocess(gray_image(64, 64, 128));
        REQUIRE(v.size() == kPixelCount);
        for (double x : v)
            CHECK(x == 128.0 / 255.0);
    }
    SUBCASE("range endpoints") {
        for (double x : preprocess(gray_image(50, 70, 0)))
            CHECK(x == 0.0);
        for (double x : preprocess(gray_image(50, 70, 255)))
            CHECK(x == 1.0);
        for (double x : preprocess(gray_image(17, 9, 65535, 65535)))
            CHECK(x == 1.0);
    }
    SUBCASE("native size is a pure reindexing") {
        auto img = gray_image(32, 32, 0);
        img.samples[0] = 255;
        const auto v = preprocess(img);
        CHECK(v[0] == 1.0);
        for (std::size_t i = 1; i < v.size(); ++i)
            CHECK(v[i] == 0.0);

        Rng rng(2);
        for (auto& s : img.samples)
            s = static_cast<std::uint16_t>(rng.below(256));
        const auto w = preprocess(img);
        for (std::size_t i = 0; i < w.size(); ++i)
            CHECK(w[i] == img.samples[i] / 255.0);
    }
    SUBCASE("halving averages 2x2 blocks row-major") {
        Rng rng(3);
        auto img = gray_image(64, 64, 0);
        for (auto& s : img.samples)
            s = static_cast<std::uint16_t>(rng.below(256));
        const auto v = preprocess(img);
        for (std::size_t y = 0; y < 32; ++y)
            for (std::size_t x = 0; x < 32; ++x) {
                const double block = img.at(2 * x, 2 * y) + img.at(2 * x + 1, 2 * y) + img.at(2 * x, 2 * y + 1) +
                                     img.at(2 * x + 1, 2 * y + 1);
                CHECK(v[y * 32 + x] == doctest::Approx(block / 4.0 / 255.0).epsilon(1e-14));
            }
    }
    SUBCASE("zero area is rejected") {
        CHECK_THROWS_AS(preprocess(gray_image(0, 10, 0)), DegenerateImage);
    }
}

TEST_CASE("box_resample weights fractional overlaps") {
    // Width 3 -> 2: outputs cover [0, 1.5) and [1.5, 3).
    const std::vector<double> row{3.0, 6.0, 9.0};
    const auto out = box_resample(row, 3, 1, 2, 1);
    CHECK(out[0] == doctest::Approx((3.0 + 0.5 * 6.0) / 1.5));
    CHECK(out[1] == doctest::Approx((0.5 * 6.0 + 9.0) / 1.5));

    // Enlarging replicates.
    const auto up = box_resample(std::vector<double>{1.0, 5.0}, 2, 1, 4, 1);
    CHECK(up == std::vector<double>{1.0, 1.0, 5.0, 5.0});

    // Mean is preserved for any ratio.
    Rng rng(4);
    for (int t = 0; t < 50; ++t) {
        const std::size_t w = 1 + rng.below(90), h = 1 + rng.below(90);
        const auto plane = testing::random_vector(rng, w * h, 0, 255);
        const auto small = box_resample(plane, w, h, 32, 32);
        double m_in = 0, m_out = 0;
        for (double x : plane)
            m_in += x;
        for (double x : small)
            m_out += x;
        CHECK(m_out / small.size() == doctest::Approx(m_in / plane.size()).epsilon(1e-10));
    }
}

TEST_CASE("luminance") {
    Image rgb;
    rgb.width = 2;
    rgb.height = 1;
    rgb.channels = 3;
    rgb.samples = {10, 20, 30, 77, 77, 77};
    const auto lum = luminance(rgb);
    CHECK(lum[0] == doctest::Approx(0.299 * 10 + 0.587 * 20 + 0.114 * 30));
    CHECK(lum[1] == 77.0);

    Rng rng(8);
    for (int t = 0; t < 1000; ++t) {
        const auto g = static_cast<std::uint16_t>(rng.below(65536));
        rgb.samples = {g, g, g, 0, 0, 0};
        CHECK(luminance(rgb)[0] == static_cast<double>(g));
    }
}

TEST_CASE("preprocess property: length and range over random images") {
    Rng rng(21);
    for (int t = 0; t < 60; ++t) {
        Image img;
        img.width = 1 + rng.below(120);
        img.height = 1 + rng.below(120);
        img.channels = rng.below(2) ? 3 : 1;
        img.max_value = rng.below(2) ? 255 : 65535;
        img.samples.resize(img.width * img.height * img.channels);
        for (auto& s : img.samples)
            s = static_cast<std::uint16_t>(rng.below(img.max_value + 1ULL));
        const auto v = preprocess(img);
        REQUIRE(v.size() == kPixelCount);
        for (double x : v) {
            CHECK(x >= 0.0);
            CHECK(x <= 1.0);
        }
        CHECK(preprocess(img) == v);
    }
}

TEST_CASE("image decoding") {
    testing::TempDir dir("images");

    SUBCASE("PNG round trip") {
        std::vector<std::uint8_t> px(40 * 30);
        for (std::size_t i = 0; i < px.size(); ++i)
            px[i] = static_cast<std::uint8_t>(i * 7);
        write_png_gray8(dir / "a.png", 40, 30, px);
        const auto img = read_image(dir / "a.png");
        CHECK(img.width == 40);
        CHECK(img.height == 30);
        CHECK(img.channels == 1);
        CHECK(img.max_value == 255);
        CHECK(std::equal(px.begin(), px.end(), img.samples.begin(), img.samples.end()));
    }
    SUBCASE("PGM 8-bit and 16-bit") {
        auto img = gray_image(5, 3, 0, 200);
        for (std::size_t i = 0; i < img.samples.size(); ++i)
            img.samples[i] = static_cast<std::uint16_t>(i * 13);
        auto back = decode_image(encode_pgm(img));
        CHECK(back.samples == img.samples);
        CHECK(back.max_value == 200);

        auto deep = gray_image(4, 4, 0, 65535);
        for (std::size_t i = 0; i < deep.samples.size(); ++i)
            deep.samples[i] = static_cast<std::uint16_t>(i * 4000);
        back = decode_image(encode_pgm(deep));
        CHECK(back.samples == deep.samples);
        CHECK(preprocess(back)[0] == 0.0);
    }
    SUBCASE("PGM with a comment in the header") {
        const std::string text = "P5\n# made by hand\n2 1\n255\n\x10\x20";
        const auto img = decode_image(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
        CHECK(img.samples == std::vector<std::uint16_t>{0x10, 0x20});
    }
    SUBCASE("errors") {
        const std::vector<std::uint8_t> junk{'G', 'I', 'F', '8'};
        CHECK_THROWS_AS(decode_image(junk), DecodeError);
        const std::string truncated = "P5 4 4 255\n\x01\x02";
        CHECK_THROWS_AS(decode_image(std::span(reinterpret_cast<const std::uint8_t*>(truncated.data()),
                                               truncated.size())),
                        DecodeError);
        const std::string empty = "P5 0 4 255\n";
        CHECK_THROWS_AS(decode_image(std::span(reinterpret_cast<const std::uint8_t*>(empty.data()), empty.size())),
                        DegenerateImage);
        std::vector<std::uint8_t> bad_png{0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n', 0, 0, 0};
        CHECK_THROWS_AS(decode_image(bad_png), DecodeError);
        CHECK_THROWS_AS(read_image(dir / "nope.png"), IoError);
    }
}

TEST_CASE("synthetic corpus contract") {
    testing::TempDir a("synth_a"), b("synth_b");
    const SyntheticSpec spec{7, 100, 20, 5, 64};
    const auto recs = generate_synthetic_corpus(spec, a.path());
    generate_synthetic_corpus(spec, b.path());

    CHECK(recs.size() == 120);
    std::set<std::string> codes;
    for (const auto& r : recs)
        codes.insert(r.code.str());
    CHECK(codes.size() == 5);
    CHECK(std::filesystem::exists(a / "taxonomy.txt"));
    CHECK(load_taxonomy(a / "taxonomy.txt").describe() == "uniform:10");
    CHECK(std::filesystem::exists(a.path() / "corpus" / "test" / "test_00019.png"));

    SUBCASE("same seed gives byte-identical output") {
        CHECK(slurp(a / "manifest.csv") == slurp(b / "manifest.csv"));
        CHECK(slurp(a.path() / "corpus/train/train_00042.png") == slurp(b.path() / "corpus/train/train_00042.png"));
    }
    SUBCASE("different seeds give different images") {
        testing::TempDir c("synth_c");
        generate_synthetic_corpus({8, 10, 2, 5, 64}, c.path());
        CHECK(slurp(a.path() / "corpus/train/train_00001.png") != slurp(c.path() / "corpus/train/train_00001.png"));
    }
    SUBCASE("classes are tighter than the gaps between them") {
        const auto corpus = load_corpus(recs);
        double intra = 0, inter = 0;
        std::size_t n_intra = 0, n_inter = 0;
        for (std::size_t i = 0; i < corpus.size(); ++i)
            for (std::size_t j = i + 1; j < corpus.size(); ++j) {
                const double d = distance(corpus.vectors[i], corpus.vectors[j]);
                if (corpus.codes[i] == corpus.codes[j]) {
                    intra += d;
                    ++n_intra;
                } else {
                    inter += d;
                    ++n_inter;
                }
            }
        CHECK(intra / n_intra < inter / n_inter);
    }
    SUBCASE("class counts") {
        const auto stats = corpus_stats(recs);
        REQUIRE(stats.train.size() == 5);
        for (const auto& [code, count] : stats.train)
            CHECK(count == 20);
        for (const auto& [code, count] : stats.test)
            CHECK(count == 4);
    }
    SUBCASE("rejects fewer than two classes") {
        testing::TempDir c("synth_bad");
        CHECK_THROWS_AS(generate_synthetic_corpus({7, 10, 2, 1, 64}, c.path()), InvalidConfig);
    }
}

TEST_CASE("corpus stats") {
    ManifestRecord r1{"a", "a.png", parse_code("1121-127-700-500"), Split::Train};
    ManifestRecord r2{"b", "b.png", parse_code("1121-127-700-500"), Split::Train};
    ManifestRecord r3{"c", "c.png", parse_code("1121-110-700-500"), Split::Train};
    const auto stats = corpus_stats({r2, r1, r3});
    CHECK(stats.train.at("1121-127-700-500") == 2);
    CHECK(stats.test.empty());

    std::ostringstream out;
    write_stats_csv(out, stats);
    CHECK(out.str() == "split,code,count\r\ntrain,1121-110-700-500,1\r\ntrain,1121-127-700-500,2\r\n");
}

TEST_CASE("load_corpus reports the failing file") {
    testing::TempDir dir("corpus");
    ManifestRecord r{"x", dir / "missing.png", parse_code("1121-127-700-500"), Split::Train};
    CHECK_THROWS_WITH_AS(load_corpus({r}), doctest::Contains("missing.png"), IoError);
}

} // TEST_SUITE
