// Command-line front end: synth -> train -> index -> query / evaluate, plus stats.

#include "sae/dataset.hpp"
#include "sae/errors.hpp"
#include "sae/evaluation.hpp"
#include "sae/retrieval_index.hpp"
#include "sae/stacked_encoder.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

namespace {

struct SynthOptions {
    std::string out;
    std::uint64_t seed = 7;
    std::size_t n_train = 100;
    std::size_t n_test = 20;
    std::size_t classes = 5;
    std::size_t image_side = 64;
};

struct TrainOptions {
    std::string manifest;
    std::string dims;
    std::string model = "model.saem";
    std::string loss_csv;
    std::uint64_t seed = 0;
    std::size_t epochs = 30;
    double lr = 0.1;
    std::size_t batch_size = 20;
    bool no_shuffle = false;
};

struct IndexOptions {
    std::string manifest;
    std::string model = "model.saem";
    std::string index = "index.saei";
    bool binarize = false;
};

struct QueryOptions {
    std::string model = "model.saem";
    std::string index = "index.saei";
    std::string image;
    std::size_t k = 5;
};

struct EvaluateOptions {
    std::string manifest;
    std::string model = "model.saem";
    std::string index = "index.saei";
    std::string taxonomy = "uniform:10";
    std::string report = "report.csv";
    std::string summary = "summary.json";
};

struct StatsOptions {
    std::string manifest;
    std::string out;
};

void log(const std::string& line) { std::cerr << line << '\n'; }

int run_synth(const SynthOptions& o) {
    sae::SyntheticSpec spec;
    spec.seed = o.seed;
    spec.n_train = o.n_train;
    spec.n_test = o.n_test;
    spec.n_classes = o.classes;
    spec.image_side = o.image_side;
    const auto records = sae::generate_synthetic_corpus(spec, o.out);
    log("wrote " + std::to_string(records.size()) + " images, manifest and taxonomy to " + o.out);
    return 0;
}

int run_train(const TrainOptions& o) {
    const auto dims = sae::parse_dims(o.dims);
    if (dims.front() != sae::kPixelCount)
        throw sae::DimensionMismatch("architecture input is " + std::to_string(dims.front()) +
                                     " but images preprocess to " + std::to_string(sae::kPixelCount) + " values");
    sae::TrainConfig config;
    config.epochs = o.epochs;
    config.learning_rate = o.lr;
    config.batch_size = o.batch_size;
    config.seed = o.seed;
    config.shuffle = !o.no_shuffle;
    config.validate();

    const auto train = sae::load_corpus(sae::select_split(sae::load_manifest(o.manifest), sae::Split::Train));
    if (train.size() == 0)
        throw sae::InvalidConfig(o.manifest + ": train split is empty");
    log("training on " + std::to_string(train.size()) + " images");

    const auto result = sae::train_stack(train.vectors, dims, config, {},
                                         [](std::size_t layer, std::size_t epoch, double loss) {
                                             char line[96];
                                             std::snprintf(line, sizeof line, "layer %zu epoch %zu loss %.6f",
                                                           layer + 1, epoch + 1, loss);
                                             log(line);
                                         });
    sae::save_model(result.stack, o.model);

    const auto loss_path = o.loss_csv.empty() ? o.model + ".loss.csv" : o.loss_csv;
    std::ofstream loss(loss_path, std::ios::binary | std::ios::trunc);
    if (!loss)
        throw sae::IoError("cannot write " + loss_path);
    loss << "layer,epoch,mean_loss\r\n";
    for (std::size_t k = 0; k < result.reports.size(); ++k)
        for (std::size_t e = 0; e < result.reports[k].epoch_loss.size(); ++e)
            loss << k + 1 << ',' << e + 1 << ',' << sae::format_double(result.reports[k].epoch_loss[e]) << "\r\n";
    if (!loss)
        throw sae::IoError("failed writing " + loss_path);

    log("model " + result.stack.architecture() + " written to " + o.model);
    return 0;
}

sae::StackedEncoder load_pixel_model(const std::string& path) {
    auto stack = sae::load_model(path);
    if (stack.input_dim() != sae::kPixelCount)
        throw sae::DimensionMismatch(path + ": model input dimension " + std::to_string(stack.input_dim()) +
                                     " does not match " + std::to_string(sae::kPixelCount) + " pixels");
    return stack;
}

int run_index(const IndexOptions& o) {
    const auto stack = load_pixel_model(o.model);
    const auto train = sae::load_corpus(sae::select_split(sae::load_manifest(o.manifest), sae::Split::Train));
    if (train.size() == 0)
        throw sae::EmptyIndex(o.manifest + ": train split is empty");
    auto features = sae::encode_features_batch(stack, train.vectors);

    std::vector<sae::FeatureRecord> records;
    records.reserve(train.size());
    for (std::size_t i = 0; i < train.size(); ++i) {
        auto f = o.binarize ? sae::binarize(features[i]) : std::move(features[i]);
        records.push_back({train.ids[i], train.codes[i], std::move(f)});
    }
    const auto index = sae::build_index(std::move(records), o.binarize);
    sae::save_index(index, o.index);
    log("indexed " + std::to_string(index.size()) + " records of dimension " + std::to_string(index.dim()) +
        (index.binarized() ? " (binarized)" : "") + " to " + o.index);
    return 0;
}

int run_query(const QueryOptions& o) {
    const auto index = sae::load_index(o.index);
    const auto stack = load_pixel_model(o.model);
    auto features = sae::encode_features(stack, sae::preprocess(sae::read_image(o.image)));
    if (index.binarized())
        features = sae::binarize(features);
    const auto hits = index.knn(features, o.k);
    std::printf("rank\trecord_id\tcode\tdistance\n");
    for (std::size_t r = 0; r < hits.size(); ++r)
        std::printf("%zu\t%s\t%s\t%.9g\n", r + 1, hits[r].record_id.c_str(), hits[r].code.str().c_str(),
                    hits[r].distance);
    return 0;
}

int run_evaluate(const EvaluateOptions& o) {
    const auto taxonomy = sae::resolve_taxonomy(o.taxonomy);
    const auto stack = load_pixel_model(o.model);
    const auto index = sae::load_index(o.index);
    const auto records = sae::load_manifest(o.manifest);
    const auto test = sae::load_corpus(sae::select_split(records, sae::Split::Test));
    const auto train = sae::load_corpus(sae::select_split(records, sae::Split::Train));

    const auto report = sae::evaluate(stack, index, test, taxonomy, train.vectors);
    sae::write_report_csv(report, o.report);
    sae::write_summary_json(report, o.summary);

    char line[160];
    std::snprintf(line, sizeof line, "IRMA score %.4f over %zu queries (%.2f%%), compression %.2f%%, RMS train %.6f test %.6f",
                  report.total_irma_score, report.n_test, 100.0 * report.error_percentage,
                  sae::round2(report.compression_percent), report.train_rms, report.test_rms);
    log(line);
    return 0;
}

int run_stats(const StatsOptions& o) {
    const auto stats = sae::corpus_stats(sae::load_manifest(o.manifest));
    if (o.out.empty()) {
        sae::write_stats_csv(std::cout, stats);
        return 0;
    }
    std::ofstream out(o.out, std::ios::binary | std::ios::trunc);
    if (!out)
        throw sae::IoError("cannot write " + o.out);
    sae::write_stats_csv(out, stats);
    if (!out)
        throw sae::IoError("failed writing " + o.out);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stacked-autoencoder image retrieval: train, index, query and evaluate"};
    app.set_config("--config", "", "TOML config file; command-line flags take precedence");
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.require_subcommand(1);

    SynthOptions synth;
    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic labelled image corpus");
    synth_cmd->add_option("--out", synth.out, "Output directory")->required();
    synth_cmd->add_option("--seed", synth.seed, "Generator seed")->capture_default_str();
    synth_cmd->add_option("--n-train", synth.n_train, "Training images")->capture_default_str();
    synth_cmd->add_option("--n-test", synth.n_test, "Test images")->capture_default_str();
    synth_cmd->add_option("--classes", synth.classes, "Number of classes")->capture_default_str()->check(
        CLI::Range(std::size_t{2}, std::size_t{1000}));
    synth_cmd->add_option("--image-side", synth.image_side, "Side of the square images in pixels")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);

    TrainOptions train;
    auto* train_cmd = app.add_subcommand("train", "Greedily train a stacked autoencoder on the train split");
    train_cmd->add_option("--manifest", train.manifest, "Corpus manifest CSV")->required();
    train_cmd->add_option("--dims", train.dims, "Layer sizes, e.g. 1024,600,500,260")->required();
    train_cmd->add_option("--model", train.model, "Output model file")->capture_default_str();
    train_cmd->add_option("--loss-csv", train.loss_csv, "Per-epoch loss CSV (default <model>.loss.csv)");
    train_cmd->add_option("--seed", train.seed, "Initialization and shuffle seed")->capture_default_str();
    train_cmd->add_option("--epochs", train.epochs, "Epochs per layer")->capture_default_str();
    train_cmd->add_option("--lr", train.lr, "SGD learning rate")->capture_default_str();
    train_cmd->add_option("--batch-size", train.batch_size, "Minibatch size")->capture_default_str();
    train_cmd->add_flag("--no-shuffle", train.no_shuffle, "Visit samples in manifest order");

    IndexOptions index;
    auto* index_cmd = app.add_subcommand("index", "Encode the train split and write a feature index");
    index_cmd->add_option("--manifest", index.manifest, "Corpus manifest CSV")->required();
    index_cmd->add_option("--model", index.model, "Model file")->capture_default_str();
    index_cmd->add_option("--index", index.index, "Output index file")->capture_default_str();
    index_cmd->add_flag("--binarize", index.binarize, "Store features thresholded at 0.5");

    QueryOptions query;
    auto* query_cmd = app.add_subcommand("query", "Print the k nearest indexed images for one image");
    query_cmd->add_option("--model", query.model, "Model file")->capture_default_str();
    query_cmd->add_option("--index", query.index, "Index file")->capture_default_str();
    query_cmd->add_option("--image", query.image, "Query image (PNG or PGM)")->required();
    query_cmd->add_option("--k", query.k, "Number of neighbors")->capture_default_str()->check(CLI::PositiveNumber);

    EvaluateOptions evaluate;
    auto* eval_cmd = app.add_subcommand("evaluate", "Score 1-NN retrieval of the test split");
    eval_cmd->add_option("--manifest", evaluate.manifest, "Corpus manifest CSV")->required();
    eval_cmd->add_option("--model", evaluate.model, "Model file")->capture_default_str();
    eval_cmd->add_option("--index", evaluate.index, "Index file")->capture_default_str();
    eval_cmd->add_option("--taxonomy", evaluate.taxonomy, "Taxonomy file or uniform:B")->capture_default_str();
    eval_cmd->add_option("--report", evaluate.report, "Per-query report CSV")->capture_default_str();
    eval_cmd->add_option("--summary", evaluate.summary, "Summary JSON")->capture_default_str();

    StatsOptions stats;
    auto* stats_cmd = app.add_subcommand("stats", "Per-split class distribution as split,code,count CSV");
    stats_cmd->add_option("--manifest", stats.manifest, "Corpus manifest CSV")->required();
    stats_cmd->add_option("--out", stats.out, "Output CSV (default standard output)");

    for (auto* sub : {synth_cmd, train_cmd, index_cmd, query_cmd, eval_cmd, stats_cmd})
        sub->allow_config_extras(CLI::config_extras_mode::error);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    // Echo the resolved configuration so every run is reproducible from its log.
    for (auto* sub : app.get_subcommands())
        std::cerr << "# resolved configuration: " << sub->get_name() << '\n' << sub->config_to_str(true, false);

    try {
        if (*synth_cmd)
            return run_synth(synth);
        if (*train_cmd)
            return run_train(train);
        if (*index_cmd)
            return run_index(index);
        if (*query_cmd)
            return run_query(query);
        if (*eval_cmd)
            return run_evaluate(evaluate);
        if (*stats_cmd)
            return run_stats(stats);
    } catch (const sae::InvalidArchitecture& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const sae::InvalidConfig& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const sae::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
