#include "sae/errors.hpp"
#include "sae/stacked_encoder.hpp"

#include "test_support.hpp"
#include "gradient_oracles.hpp"

#include <doctest.h>

#include <fstream>

using namespace sae;
using namespace sae::testing;

namespace {

std::vector<std::vector<double>> random_rows(Rng& rng, std::size_t count, std::size_t n) {
    std::vector<std::vector<double>> out;
    for (std::size_t i = 0; i < count; ++i)
        out.push_back(random_vector(rng, n));
    return out;
}

StackedEncoder random_stack(Rng& rng, std::vector<std::size_t> dims) {
    std::vector<AutoencoderLayer> layers;
    for (std::size_t k = 0; k + 1 < dims.size(); ++k)
        layers.push_back(random_layer(rng, dims[k], dims[k + 1]));
    return StackedEncoder(std::move(layers));
}

} // namespace

TEST_SUITE("stacked_encoder") {

TEST_CASE("dimension lists") {
    CHECK(parse_dims("1024,600,500,260") == std::vector<std::size_t>{1024, 600, 500, 260});
    CHECK(parse_dims(" 1024 , 512") == std::vector<std::size_t>{1024, 512});
    CHECK_THROWS_AS(parse_dims("1024"), InvalidArchitecture);
    CHECK_THROWS_AS(parse_dims("8,4,4"), InvalidArchitecture);
    CHECK_THROWS_AS(parse_dims("8,16"), InvalidArchitecture);
    CHECK_THROWS_AS(parse_dims("8,0"), InvalidArchitecture);
    CHECK_THROWS_AS(parse_dims("8,x"), InvalidArchitecture);
    CHECK_THROWS_AS(parse_dims("8,,4"), InvalidArchitecture);
}

TEST_CASE("greedy training") {
    Rng rng(11);
    const auto data = random_rows(rng, 30, 24);
    TrainConfig cfg;
    cfg.epochs = 3;
    cfg.batch_size = 7;
    cfg.seed = 5;

    SUBCASE("layer count, chaining and callbacks") {
        std::vector<std::size_t> seen_layers;
        const std::vector<std::size_t> dims{24, 12, 8, 3};
        const auto result = train_stack(data, dims, cfg, {}, [&](std::size_t layer, std::size_t, double) {
            seen_layers.push_back(layer);
        });
        REQUIRE(result.stack.layers().size() == 3);
        CHECK(result.reports.size() == 3);
        CHECK(result.stack.input_dim() == 24);
        CHECK(result.stack.feature_dim() == 3);
        CHECK(result.stack.architecture() == "24/12/24, 12/8/12, 8/3/8");
        CHECK(seen_layers == std::vector<std::size_t>{0, 0, 0, 1, 1, 1, 2, 2, 2});
        CHECK(train_stack(data, dims, cfg).stack == result.stack);
    }
    SUBCASE("a single-layer stack is exactly train_layer") {
        const std::vector<std::size_t> dims{24, 10};
        CHECK(train_stack(data, dims, cfg).stack.layers()[0] == train_layer(data, 24, 10, cfg).first);
    }
    SUBCASE("layer k is train_layer on the previous latents with seed + k") {
        const std::vector<std::size_t> dims{24, 10, 4};
        const auto stack = train_stack(data, dims, cfg).stack;
        const auto first = train_layer(data, 24, 10, cfg).first;
        const auto latents = encode_features_batch(StackedEncoder(std::vector{first}), data);
        TrainConfig second_cfg = cfg;
        second_cfg.seed = cfg.seed + 1;
        CHECK(stack.layers()[1] == train_layer(latents, 10, 4, second_cfg).first);
    }
    SUBCASE("per-layer overrides") {
        const std::vector<std::size_t> dims{24, 10, 4};
        std::vector<TrainConfig> per_layer(2, cfg);
        per_layer[1].epochs = 1;
        const auto result = train_stack(data, dims, cfg, per_layer);
        CHECK(result.reports[1].epoch_loss.size() == 1);
        CHECK_THROWS_AS(train_stack(data, dims, cfg, std::span(per_layer).first(1)), InvalidConfig);
    }
    SUBCASE("bad architectures") {
        const std::vector<std::size_t> flat{24, 12, 12};
        CHECK_THROWS_AS(train_stack(data, flat, cfg), InvalidArchitecture);
        const std::vector<std::size_t> wrong_input{20, 10};
        CHECK_THROWS_AS(train_stack(data, wrong_input, cfg), DimensionMismatch);
        CHECK_THROWS_AS(StackedEncoder({AutoencoderLayer(8, 4), AutoencoderLayer(5, 2)}), InvalidArchitecture);
        CHECK_THROWS_AS(StackedEncoder(std::vector<AutoencoderLayer>{}), InvalidArchitecture);
    }
}

TEST_CASE("encode_features is the composition of layer encoders") {
    Rng rng(3);
    const auto stack = random_stack(rng, {16, 8, 4, 2});
    for (int t = 0; t < 20; ++t) {
        const auto x = random_vector(rng, 16);
        const auto& l = stack.layers();
        CHECK(encode_features(stack, x) == encode(l[2], encode(l[1], encode(l[0], x))));
    }
    const auto xs = random_rows(rng, 50, 16);
    const auto batch = encode_features_batch(stack, xs);
    for (std::size_t i = 0; i < xs.size(); ++i)
        CHECK(batch[i] == encode_features(stack, xs[i]));
    CHECK_THROWS_AS(encode_features(stack, std::vector<double>(15)), DimensionMismatch);
}

TEST_CASE("compression percentages") {
    CHECK(round2(compression_percent(1024, 512)) == 50.0);
    CHECK(round2(compression_percent(1024, 150)) == 85.35);
    CHECK(round2(compression_percent(1024, 275)) == 73.14);
    CHECK(round2(compression_percent(1024, 225)) == 78.03);
    CHECK(round2(compression_percent(1024, 260)) == 74.61);
    CHECK(round2(compression_percent(1024, 200)) == 80.47);
    Rng rng(1);
    CHECK(compression_percent(random_stack(rng, {16, 8, 4})) == 75.0);
}

TEST_CASE("reconstruction RMS conventions") {
    Rng rng(8);
    const auto stack = random_stack(rng, {10, 6, 3});
    const auto data = random_rows(rng, 12, 10);
    CHECK(first_layer_rms(stack, data) == rms_reconstruction_error(stack.layers()[0], data));

    double acc = 0.0;
    for (const auto& x : data) {
        const auto y = decode(stack.layers()[0], decode(stack.layers()[1], encode_features(stack, x)));
        for (std::size_t j = 0; j < x.size(); ++j)
            acc += (y[j] - x[j]) * (y[j] - x[j]);
    }
    CHECK(full_unroll_rms(stack, data) == doctest::Approx(std::sqrt(acc / 120.0)).epsilon(1e-14));
}

TEST_CASE("model persistence") {
    TempDir dir("model");
    Rng rng(17);

    SUBCASE("round trip is bitwise") {
        for (int t = 0; t < 10; ++t) {
            const auto stack = random_stack(rng, {9 + static_cast<std::size_t>(t), 6, 3});
            save_model(stack, dir / "m.saem");
            const auto loaded = load_model(dir / "m.saem");
            CHECK(loaded == stack);
            CHECK(serialize_model(loaded) == serialize_model(stack));
        }
    }
    SUBCASE("corruption is detected") {
        const auto bytes = serialize_model(random_stack(rng, {12, 5, 2}));

        auto bad_magic = bytes;
        bad_magic[0] = 'X';
        CHECK_THROWS_WITH_AS(deserialize_model(bad_magic), doctest::Contains("magic"), CorruptModel);

        for (std::size_t cut : {std::size_t{0}, std::size_t{3}, std::size_t{8}, bytes.size() / 2, bytes.size() - 1}) {
            CAPTURE(cut);
            CHECK_THROWS_AS(deserialize_model(std::span(bytes).first(cut)), CorruptModel);
        }
        for (std::size_t pos = 4; pos < bytes.size(); pos += 13) {
            auto flipped = bytes;
            flipped[pos] ^= 0x10;
            CHECK_THROWS_AS(deserialize_model(flipped), CorruptModel);
        }

        std::ofstream(dir / "junk.saem", std::ios::binary) << "SAEM";
        CHECK_THROWS_WITH_AS(load_model(dir / "junk.saem"), doctest::Contains("junk.saem"), CorruptModel);
        CHECK_THROWS_AS(load_model(dir / "absent.saem"), IoError);
    }
}

} // TEST_SUITE
