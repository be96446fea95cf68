#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sae {

inline constexpr std::size_t kAxisCount = 4;
inline constexpr std::array<std::size_t, kAxisCount> kAxisLengths{4, 3, 3, 3};
inline constexpr char kWildcard = '*';

/// A hierarchical class code TTTT-DDD-AAA-BBB. Each position is a label
/// in [0-9a-z] or the wildcard `*`.
class IrmaCode {
public:
    IrmaCode() = default;

    const std::array<std::string, kAxisCount>& axes() const { return axes_; }
    const std::string& axis(std::size_t i) const { return axes_.at(i); }

    /// Canonical `TTTT-DDD-AAA-BBB` form.
    std::string str() const;

    friend bool operator==(const IrmaCode&, const IrmaCode&) = default;
    friend auto operator<=>(const IrmaCode&, const IrmaCode&) = default;

private:
    friend IrmaCode parse_code(std::string_view text);
    std::array<std::string, kAxisCount> axes_{"0000", "000", "000", "000"};
};

/// Throws MalformedCode naming the offending axis or position.
IrmaCode parse_code(std::string_view text);

bool is_label_char(char c);

enum class PositionVerdict { Agree, DontKnow, Disagree };

/// delta of the error sum: 0, 0.5 and 1.
constexpr double verdict_weight(PositionVerdict v) {
    switch (v) {
    case PositionVerdict::Agree: return 0.0;
    case PositionVerdict::DontKnow: return 0.5;
    case PositionVerdict::Disagree: return 1.0;
    }
    return 1.0;
}

using TaxonomyNodes = std::map<std::string, std::string, std::less<>>;

/// Supplies the number of possible labels at each decision node.
///
/// Tree mode stores, per axis, the allowed child labels below each prefix.
/// Uniform mode answers a constant branching factor for every node.
class Taxonomy {
public:
    static Taxonomy uniform(unsigned branching);
    static Taxonomy tree(std::array<TaxonomyNodes, kAxisCount> nodes);

    bool is_uniform() const { return uniform_ != 0; }
    unsigned uniform_branching() const { return uniform_; }

    /// Children count below `prefix` on `axis`. Throws TaxonomyGap when the
    /// node is unknown in tree mode.
    unsigned branching(std::size_t axis, std::string_view prefix) const;

    /// Text spec used by the CLI and config files: `uniform:B`.
    std::string describe() const;

private:
    unsigned uniform_ = 0;
    std::array<TaxonomyNodes, kAxisCount> nodes_;
};

/// Tree file: `axis<TAB>prefix<TAB>children` per line, `#` comments. A file
/// whose only record is `uniform:B` selects uniform mode.
Taxonomy load_taxonomy(const std::filesystem::path& path);

/// Accepts `uniform:B` or a path to a taxonomy file.
Taxonomy resolve_taxonomy(std::string_view spec);

/// Verdicts for one axis, left to right, with the propagation rules applied.
/// Truth positions that are unspecified (at or after a truth `*`) are Agree.
std::vector<PositionVerdict> axis_verdicts(std::string_view truth, std::string_view predicted);

std::array<std::vector<PositionVerdict>, kAxisCount> position_verdicts(const IrmaCode& truth,
                                                                       const IrmaCode& predicted);

/// Normalized error of one axis in [0, 0.25]. `axis` selects the taxonomy
/// tree. Unspecified truth positions are excluded from the normalizer.
double axis_error(std::size_t axis, std::string_view truth, std::span<const PositionVerdict> verdicts,
                  const Taxonomy& taxonomy);

/// Sum of axis errors over parallel axis lists. Four axes give [0, 1].
double axes_error(std::span<const std::string> truth, std::span<const std::string> predicted,
                  const Taxonomy& taxonomy);

double code_error(const IrmaCode& truth, const IrmaCode& predicted, const Taxonomy& taxonomy);

} // namespace sae
