#include "sae/evaluation.hpp"

#include "sae/csv.hpp"
#include "sae/errors.hpp"
#include "sae/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <numeric>

namespace sae {

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

EvalReport evaluate(const StackedEncoder& stack, const FeatureIndex& train_index, const Corpus& test,
                    const Taxonomy& taxonomy, std::span<const std::vector<double>> train_vectors) {
    if (test.size() == 0)
        throw InvalidConfig("evaluation needs at least one test record");
    if (train_index.dim() != stack.feature_dim())
        throw DimensionMismatch("index dimension " + std::to_string(train_index.dim()) +
                                " does not match model feature dimension " + std::to_string(stack.feature_dim()));

    const std::size_t n = test.size();
    std::vector<EvalRow> rows(n);
    std::vector<std::exception_ptr> failures(n);

#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
        try {
            auto features = encode_features(stack, test.vectors[i]);
            if (train_index.binarized())
                features = binarize(features);
            const auto hit = train_index.knn(features, 1).front();
            auto& row = rows[i];
            row.query_id = test.ids[i];
            row.truth = test.codes[i];
            row.hit_id = hit.record_id;
            row.hit_code = hit.code;
            row.distance = hit.distance;
            row.error = code_error(row.truth, row.hit_code, taxonomy);
        } catch (...) {
            failures[i] = std::current_exception();
        }
    }
    for (const auto& f : failures)
        if (f)
            std::rethrow_exception(f);

    std::sort(rows.begin(), rows.end(), [](const EvalRow& a, const EvalRow& b) { return a.query_id < b.query_id; });

    EvalReport report;
    report.architecture = stack.architecture();
    report.n_test = n;
    for (const auto& r : rows)
        report.total_irma_score += r.error;
    report.error_percentage = report.total_irma_score / static_cast<double>(n);
    report.compression_percent = compression_percent(stack);
    report.test_rms = first_layer_rms(stack, test.vectors);
    report.test_rms_unrolled = full_unroll_rms(stack, test.vectors);
    if (train_vectors.empty()) {
        report.train_rms = std::numeric_limits<double>::quiet_NaN();
        report.train_rms_unrolled = std::numeric_limits<double>::quiet_NaN();
    } else {
        report.train_rms = first_layer_rms(stack, train_vectors);
        report.train_rms_unrolled = full_unroll_rms(stack, train_vectors);
    }
    report.rows = std::move(rows);
    return report;
}

std::vector<double> random_baseline(const EvalReport& report, const Taxonomy& taxonomy, std::uint64_t seed,
                                    std::size_t rounds) {
    std::vector<double> out;
    const std::size_t n = report.rows.size();
    if (n == 0)
        return out;
    std::vector<std::size_t> perm(n);
    for (std::size_t round = 0; round < rounds; ++round) {
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        Rng rng(seed + round);
        rng.shuffle(std::span<std::size_t>(perm));
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            total += code_error(report.rows[i].truth, report.rows[perm[i]].hit_code, taxonomy);
        out.push_back(total / static_cast<double>(n));
    }
    return out;
}

void write_report_csv(std::ostream& out, const EvalReport& report) {
    csv::write_row(out, {"query_id", "truth_code", "hit_id", "hit_code", "error"});
    for (const auto& r : report.rows)
        csv::write_row(out, {r.query_id, r.truth.str(), r.hit_id, r.hit_code.str(), format_double(r.error)});
    csv::write_row(out, {"TOTAL", "", "", "", format_double(report.total_irma_score)});
}

void write_report_csv(const EvalReport& report, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot write " + path.string());
    write_report_csv(out, report);
    if (!out)
        throw IoError("failed writing " + path.string());
}

std::string summary_json(const EvalReport& report) {
    // NaN is not representable in JSON; missing measurements become null.
    const auto number = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
    nlohmann::ordered_json j;
    j["architecture"] = report.architecture;
    j["n_test"] = report.n_test;
    j["total_irma_score"] = number(report.total_irma_score);
    j["error_percentage"] = number(report.error_percentage);
    j["compression_percent"] = number(report.compression_percent);
    j["compression_percent_display"] = number(round2(report.compression_percent));
    j["train_rms"] = number(report.train_rms);
    j["test_rms"] = number(report.test_rms);
    j["rms_gap"] = number(std::abs(report.train_rms - report.test_rms));
    j["train_rms_unrolled"] = number(report.train_rms_unrolled);
    j["test_rms_unrolled"] = number(report.test_rms_unrolled);
    return j.dump(2) + "\n";
}

void write_summary_json(const EvalReport& report, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot write " + path.string());
    out << summary_json(report);
    if (!out)
        throw IoError("failed writing " + path.string());
}

} // namespace sae
