#include "sae/irma_code.hpp"

#include "sae/errors.hpp"

#include <charconv>
#include <optional>
#include <fstream>

namespace sae {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\r' || s.front() == '\t'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\r' || s.back() == '\t'))
        s.remove_suffix(1);
    return s;
}

std::optional<unsigned> parse_uniform(std::string_view spec) {
    constexpr std::string_view kPrefix = "uniform:";
    if (!spec.starts_with(kPrefix))
        return std::nullopt;
    spec.remove_prefix(kPrefix.size());
    unsigned b = 0;
    auto [ptr, ec] = std::from_chars(spec.data(), spec.data() + spec.size(), b);
    if (ec != std::errc{} || ptr != spec.data() + spec.size() || b == 0)
        throw MalformedTaxonomy("invalid uniform taxonomy spec 'uniform:" + std::string(spec) +
                                "' (expected uniform:B with B >= 1)");
    return b;
}

} // namespace

bool is_label_char(char c) { return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z'); }

std::string IrmaCode::str() const {
    std::string out;
    for (std::size_t i = 0; i < kAxisCount; ++i) {
        if (i)
            out += '-';
        out += axes_[i];
    }
    return out;
}

IrmaCode parse_code(std::string_view text) {
    const std::string quoted = "'" + std::string(text) + "'";
    if (text.empty())
        throw MalformedCode("empty IRMA code");

    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const auto dash = text.find('-', start);
        parts.push_back(text.substr(start, dash == std::string_view::npos ? dash : dash - start));
        if (dash == std::string_view::npos)
            break;
        start = dash + 1;
    }
    if (parts.size() != kAxisCount)
        throw MalformedCode("IRMA code " + quoted + " has " + std::to_string(parts.size()) +
                            " axes, expected 4");

    IrmaCode code;
    for (std::size_t a = 0; a < kAxisCount; ++a) {
        if (parts[a].size() != kAxisLengths[a])
            throw MalformedCode("IRMA code " + quoted + ": axis " + std::to_string(a + 1) +
                                " has length " + std::to_string(parts[a].size()) + ", expected " +
                                std::to_string(kAxisLengths[a]));
        for (std::size_t i = 0; i < parts[a].size(); ++i) {
            const char c = parts[a][i];
            if (!is_label_char(c) && c != kWildcard)
                throw MalformedCode("IRMA code " + quoted + ": illegal character at axis " +
                                    std::to_string(a + 1) + " position " + std::to_string(i + 1));
        }
        code.axes_[a] = std::string(parts[a]);
    }
    return code;
}

// ---------------------------------------------------------------------------
// Taxonomy

Taxonomy Taxonomy::uniform(unsigned branching) {
    if (branching == 0)
        throw MalformedTaxonomy("uniform branching factor must be >= 1");
    Taxonomy t;
    t.uniform_ = branching;
    return t;
}

Taxonomy Taxonomy::tree(std::array<TaxonomyNodes, kAxisCount> nodes) {
    for (std::size_t a = 0; a < kAxisCount; ++a)
        for (const auto& [prefix, children] : nodes[a])
            if (children.empty())
                throw MalformedTaxonomy("taxonomy node '" + prefix + "' on axis " +
                                        std::to_string(a) + " has no children");
    Taxonomy t;
    t.nodes_ = std::move(nodes);
    return t;
}

unsigned Taxonomy::branching(std::size_t axis, std::string_view prefix) const {
    if (uniform_ != 0)
        return uniform_;
    const auto& nodes = nodes_.at(axis);
    const auto it = nodes.find(prefix);
    if (it == nodes.end())
        throw TaxonomyGap("taxonomy has no node for prefix '" + std::string(prefix) + "' on axis " +
                          std::to_string(axis));
    return static_cast<unsigned>(it->second.size());
}

std::string Taxonomy::describe() const {
    if (uniform_ != 0)
        return "uniform:" + std::to_string(uniform_);
    std::size_t count = 0;
    for (const auto& n : nodes_)
        count += n.size();
    return "tree(" + std::to_string(count) + " nodes)";
}

Taxonomy load_taxonomy(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open taxonomy file " + path.string());

    std::array<TaxonomyNodes, kAxisCount> nodes;
    std::optional<unsigned> uniform;
    std::size_t records = 0;
    std::string line;
    for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
        const auto where = path.string() + ":" + std::to_string(lineno);
        std::string_view view = line;
        if (!view.empty() && view.back() == '\r')
            view.remove_suffix(1);
        if (trim(view).empty() || trim(view).front() == '#')
            continue;
        ++records;

        if (trim(view).starts_with("uniform:")) {
            uniform = parse_uniform(trim(view));
            continue;
        }

        const auto tab1 = view.find('\t');
        const auto tab2 = tab1 == std::string_view::npos ? tab1 : view.find('\t', tab1 + 1);
        if (tab2 == std::string_view::npos)
            throw MalformedTaxonomy(where + ": expected axis<TAB>prefix<TAB>children");
        const auto axis_text = view.substr(0, tab1);
        const auto prefix = view.substr(tab1 + 1, tab2 - tab1 - 1);
        const auto children = trim(view.substr(tab2 + 1));

        std::size_t axis = 0;
        auto [ptr, ec] = std::from_chars(axis_text.data(), axis_text.data() + axis_text.size(), axis);
        if (ec != std::errc{} || ptr != axis_text.data() + axis_text.size() || axis >= kAxisCount)
            throw MalformedTaxonomy(where + ": axis index must be 0..3");
        if (prefix.size() >= kAxisLengths[axis])
            throw MalformedTaxonomy(where + ": prefix longer than the axis allows");
        if (children.empty())
            throw MalformedTaxonomy(where + ": node has no children");
        for (char c : prefix)
            if (!is_label_char(c))
                throw MalformedTaxonomy(where + ": illegal prefix character");
        for (char c : children)
            if (!is_label_char(c))
                throw MalformedTaxonomy(where + ": illegal child label");
        if (!nodes[axis].emplace(std::string(prefix), std::string(children)).second)
            throw MalformedTaxonomy(where + ": duplicate node");
    }

    if (uniform) {
        if (records != 1)
            throw MalformedTaxonomy(path.string() + ": uniform spec must be the only record");
        return Taxonomy::uniform(*uniform);
    }
    if (records == 0)
        throw MalformedTaxonomy(path.string() + ": empty taxonomy");
    return Taxonomy::tree(std::move(nodes));
}

Taxonomy resolve_taxonomy(std::string_view spec) {
    if (auto b = parse_uniform(spec))
        return Taxonomy::uniform(*b);
    return load_taxonomy(std::filesystem::path(std::string(spec)));
}

// ---------------------------------------------------------------------------
// Scoring

std::vector<PositionVerdict> axis_verdicts(std::string_view truth, std::string_view predicted) {
    if (truth.size() != predicted.size())
        throw DimensionMismatch("axis lengths differ: '" + std::string(truth) + "' vs '" +
                                std::string(predicted) + "'");

    enum class State { Open, Wrong, Unknown, Unspecified };
    State state = State::Open;
    std::vector<PositionVerdict> out;
    out.reserve(truth.size());
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] == kWildcard)
            state = State::Unspecified;
        switch (state) {
        case State::Unspecified:
            out.push_back(PositionVerdict::Agree);
            break;
        case State::Wrong:
            out.push_back(PositionVerdict::Disagree);
            break;
        case State::Unknown:
            out.push_back(PositionVerdict::DontKnow);
            break;
        case State::Open:
            if (predicted[i] == kWildcard) {
                out.push_back(PositionVerdict::DontKnow);
                state = State::Unknown;
            } else if (predicted[i] == truth[i]) {
                out.push_back(PositionVerdict::Agree);
            } else {
                out.push_back(PositionVerdict::Disagree);
                state = State::Wrong;
            }
            break;
        }
    }
    return out;
}

std::array<std::vector<PositionVerdict>, kAxisCount> position_verdicts(const IrmaCode& truth,
                                                                       const IrmaCode& predicted) {
    std::array<std::vector<PositionVerdict>, kAxisCount> out;
    for (std::size_t a = 0; a < kAxisCount; ++a)
        out[a] = axis_verdicts(truth.axis(a), predicted.axis(a));
    return out;
}

double axis_error(std::size_t axis, std::string_view truth, std::span<const PositionVerdict> verdicts,
                  const Taxonomy& taxonomy) {
    if (verdicts.size() != truth.size())
        throw DimensionMismatch("verdict count does not match axis length");
    double raw = 0.0;
    double max_raw = 0.0;
    for (std::size_t i = 0; i < truth.size() && truth[i] != kWildcard; ++i) {
        const double b = taxonomy.branching(axis, truth.substr(0, i));
        const double weight = 1.0 / (b * static_cast<double>(i + 1));
        raw += weight * verdict_weight(verdicts[i]);
        max_raw += weight;
    }
    if (max_raw == 0.0)
        return 0.0;
    return 0.25 * raw / max_raw;
}

double axes_error(std::span<const std::string> truth, std::span<const std::string> predicted,
                  const Taxonomy& taxonomy) {
    if (truth.size() != predicted.size() || truth.size() > kAxisCount)
        throw DimensionMismatch("axis lists must have equal length <= 4");
    double total = 0.0;
    for (std::size_t a = 0; a < truth.size(); ++a) {
        const auto verdicts = axis_verdicts(truth[a], predicted[a]);
        total += axis_error(a, truth[a], verdicts, taxonomy);
    }
    return total;
}

double code_error(const IrmaCode& truth, const IrmaCode& predicted, const Taxonomy& taxonomy) {
    return axes_error(truth.axes(), predicted.axes(), taxonomy);
}

} // namespace sae
