#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <variant>
#include <vector>

namespace elaprobe::rng {

enum class GeneratorKind { MersenneTwister, Randu };

/// 32-bit MT19937 with the standard initialization recurrence.
class MersenneTwister {
public:
    static constexpr std::size_t kStateSize = 624;
    static constexpr std::uint32_t kDefaultSeed = 5489u;

    explicit MersenneTwister(std::uint32_t seed = kDefaultSeed);

    std::uint32_t next_u32();
    /// x / 2^32, in [0, 1).
    double next_unit();

    const std::array<std::uint32_t, kStateSize>& words() const { return state_; }
    std::size_t index() const { return index_; }

private:
    void twist();

    std::array<std::uint32_t, kStateSize> state_{};
    std::size_t index_ = kStateSize;
};

/// RANDU: x <- 65539 * x mod 2^31. Even seeds are made odd by setting bit 0.
class Randu {
public:
    static constexpr std::uint32_t kMultiplier = 65539u;
    static constexpr std::uint32_t kModulusMask = 0x7FFFFFFFu;

    explicit Randu(std::uint32_t seed = 1u);

    std::uint32_t next_u31();
    /// x / 2^31, in [0, 1).
    double next_unit();

    std::uint32_t state() const { return state_; }

private:
    std::uint32_t state_;
};

/// Either generator behind one interface. Single-owner and mutable.
class RngState {
public:
    static RngState mersenne_twister(std::uint32_t seed) { return RngState(MersenneTwister(seed)); }
    static RngState randu(std::uint32_t seed) { return RngState(Randu(seed)); }

    GeneratorKind kind() const;
    double next_unit();

    MersenneTwister* as_mersenne_twister() { return std::get_if<MersenneTwister>(&impl_); }
    Randu* as_randu() { return std::get_if<Randu>(&impl_); }

private:
    explicit RngState(MersenneTwister mt) : impl_(mt) {}
    explicit RngState(Randu r) : impl_(r) {}

    std::variant<MersenneTwister, Randu> impl_;
};

// Seed derivation. The constants below belong to the reproducibility contract:
//   round(h, c) = mix64(h + kGoldenGamma) ^ c
//   derive(base, c_1..c_k) = mix64(round(...round(base, c_1)..., c_k))
// with mix64 the splitmix64 finalizer (shifts 30/27/31).
inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ull;
inline constexpr std::uint64_t kMixMul1 = 0xBF58476D1CE4E5B9ull;
inline constexpr std::uint64_t kMixMul2 = 0x94D049BB133111EBull;

constexpr std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= kMixMul1;
    z ^= z >> 27;
    z *= kMixMul2;
    z ^= z >> 31;
    return z;
}

/// Purpose tags occupy the first context slot so streams for different jobs never coincide.
enum class Purpose : std::uint64_t {
    Design = 1,
    Instance = 2,
    Split = 3,
    Shuffle = 4,
    InstanceInternal = 5,
    Test = 99,
};

struct SeedRecipe {
    std::uint64_t base_seed = 0;
    std::vector<std::uint64_t> context;
};

std::uint64_t derive_seed(const SeedRecipe& recipe);
std::uint64_t derive_seed(std::uint64_t base_seed, std::span<const std::uint64_t> context);
std::uint64_t derive_seed(std::uint64_t base_seed, std::initializer_list<std::uint64_t> context);

/// Folds a 64-bit seed into the 32-bit seed both generators take: low ^ high word.
constexpr std::uint32_t fold_seed32(std::uint64_t seed) {
    return static_cast<std::uint32_t>(seed ^ (seed >> 32));
}

/// Uniform integer in [0, bound) by rejection on 32-bit draws. bound >= 1.
std::uint32_t uniform_below(MersenneTwister& mt, std::uint32_t bound);

/// Standard normal deviate (Box-Muller, cosine branch only, so one normal per two draws).
double standard_normal(MersenneTwister& mt);

/// In-place Fisher-Yates shuffle, last index down to 1.
template <typename T>
void shuffle(MersenneTwister& mt, std::span<T> values) {
    for (std::size_t i = values.size(); i > 1; --i) {
        const auto k = uniform_below(mt, static_cast<std::uint32_t>(i));
        std::swap(values[i - 1], values[k]);
    }
}

}  // namespace elaprobe::rng
