#pragma once

#include "sae/dataset.hpp"
#include "sae/irma_code.hpp"
#include "sae/retrieval_index.hpp"
#include "sae/stacked_encoder.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace sae {

struct EvalRow {
    std::string query_id;
    IrmaCode truth;
    std::string hit_id;
    IrmaCode hit_code;
    double distance = 0.0;
    double error = 0.0;
};

struct EvalReport {
    std::string architecture;
    std::size_t n_test = 0;
    double total_irma_score = 0.0;
    double error_percentage = 0.0;  ///< total / n_test
    double compression_percent = 0.0;
    double train_rms = 0.0;  ///< first-layer reconstruction
    double test_rms = 0.0;
    double train_rms_unrolled = 0.0;  ///< through the whole stack and back
    double test_rms_unrolled = 0.0;
    std::vector<EvalRow> rows;  ///< ascending by query_id
};

/// 1-NN retrieval of every test record against the training index, scored
/// with code_error. `train_vectors` feed the train-side RMS; pass an empty
/// span to skip it (both train RMS fields are then NaN).
EvalReport evaluate(const StackedEncoder& stack, const FeatureIndex& train_index, const Corpus& test,
                    const Taxonomy& taxonomy, std::span<const std::vector<double>> train_vectors);

/// Error percentage after assigning each query the hit code of a randomly
/// permuted other query, once per round. Rounds use seeds seed, seed+1, ...
std::vector<double> random_baseline(const EvalReport& report, const Taxonomy& taxonomy, std::uint64_t seed,
                                    std::size_t rounds);

/// `query_id,truth_code,hit_id,hit_code,error`, one row per query, then
/// `TOTAL,,,,<total>`.
void write_report_csv(std::ostream& out, const EvalReport& report);
void write_report_csv(const EvalReport& report, const std::filesystem::path& path);

/// JSON object with every scalar field of the report.
std::string summary_json(const EvalReport& report);
void write_summary_json(const EvalReport& report, const std::filesystem::path& path);

/// Shortest text that parses back to the same double.
std::string format_double(double v);

} // namespace sae
