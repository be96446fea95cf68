#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace sae {

/// Seeded generator whose streams are identical on every platform. The
/// standard distributions are implementation-defined, so the conversions
/// from raw 64-bit draws are done here.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, bound), rejection-sampled to avoid modulo bias.
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t draw;
        do {
            draw = engine_();
        } while (draw >= limit);
        return draw % bound;
    }

    template <typename T>
    void shuffle(std::span<T> items) {
        for (std::size_t i = items.size(); i > 1; --i)
            std::swap(items[i - 1], items[below(i)]);
    }

private:
    std::mt19937_64 engine_;
};

} // namespace sae
