#include "elaprobe/rng.hpp"

#include <cmath>
#include <numbers>

namespace elaprobe::rng {

namespace {
constexpr std::uint32_t kMatrixA = 0x9908B0DFu;
constexpr std::uint32_t kUpperMask = 0x80000000u;
constexpr std::uint32_t kLowerMask = 0x7FFFFFFFu;
constexpr std::size_t kShift = 397;
}  // namespace

MersenneTwister::MersenneTwister(std::uint32_t seed) {
    state_[0] = seed;
    for (std::size_t i = 1; i < kStateSize; ++i) {
        const std::uint32_t prev = state_[i - 1];
        state_[i] = 1812433253u * (prev ^ (prev >> 30)) + static_cast<std::uint32_t>(i);
    }
    index_ = kStateSize;
}

void MersenneTwister::twist() {
    for (std::size_t i = 0; i < kStateSize; ++i) {
        const std::uint32_t y = (state_[i] & kUpperMask) | (state_[(i + 1) % kStateSize] & kLowerMask);
        std::uint32_t next = state_[(i + kShift) % kStateSize] ^ (y >> 1);
        if (y & 1u) next ^= kMatrixA;
        state_[i] = next;
    }
    index_ = 0;
}

std::uint32_t MersenneTwister::next_u32() {
    if (index_ >= kStateSize) twist();
    std::uint32_t y = state_[index_++];
    y ^= y >> 11;
    y ^= (y << 7) & 0x9D2C5680u;
    y ^= (y << 15) & 0xEFC60000u;
    y ^= y >> 18;
    return y;
}

double MersenneTwister::next_unit() {
    return static_cast<double>(next_u32()) * 0x1.0p-32;
}

Randu::Randu(std::uint32_t seed) : state_((seed & kModulusMask) | 1u) {}

std::uint32_t Randu::next_u31() {
    // 65539 * (2^31 - 1) fits comfortably in 64 bits.
    state_ = static_cast<std::uint32_t>((static_cast<std::uint64_t>(kMultiplier) * state_) & kModulusMask);
    return state_;
}

double Randu::next_unit() {
    return static_cast<double>(next_u31()) * 0x1.0p-31;
}

GeneratorKind RngState::kind() const {
    return std::holds_alternative<MersenneTwister>(impl_) ? GeneratorKind::MersenneTwister
                                                          : GeneratorKind::Randu;
}

double RngState::next_unit() {
    return std::visit([](auto& g) { return g.next_unit(); }, impl_);
}

std::uint64_t derive_seed(std::uint64_t base_seed, std::span<const std::uint64_t> context) {
    std::uint64_t h = base_seed;
    for (const std::uint64_t c : context) h = mix64(h + kGoldenGamma) ^ c;
    return mix64(h);
}

std::uint64_t derive_seed(const SeedRecipe& recipe) {
    return derive_seed(recipe.base_seed, std::span<const std::uint64_t>(recipe.context));
}

std::uint64_t derive_seed(std::uint64_t base_seed, std::initializer_list<std::uint64_t> context) {
    return derive_seed(base_seed, std::span<const std::uint64_t>(context.begin(), context.size()));
}

std::uint32_t uniform_below(MersenneTwister& mt, std::uint32_t bound) {
    // Reject the tail that would bias the modulo.
    const std::uint32_t limit = static_cast<std::uint32_t>(-bound) % bound;
    for (;;) {
        const std::uint32_t x = mt.next_u32();
        if (x >= limit) return x % bound;
    }
}

double standard_normal(MersenneTwister& mt) {
    double u1 = mt.next_unit();
    while (u1 <= 0.0) u1 = mt.next_unit();
    const double u2 = mt.next_unit();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace elaprobe::rng
