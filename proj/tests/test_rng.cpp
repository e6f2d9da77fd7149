#include "elaprobe/rng.hpp"

#include "doctest.h"

#include <algorithm>
#include <cstdint>
#include <random>
#include <set>
#include <vector>

using namespace elaprobe::rng;

TEST_CASE("mersenne twister matches std::mt19937 for several seeds") {
    for (std::uint32_t seed : {5489u, 0u, 1u, 42u, 0xFFFFFFFFu, 123456789u}) {
        MersenneTwister mt(seed);
        std::mt19937 ref(seed);
        for (int i = 0; i < 5000; ++i) REQUIRE(mt.next_u32() == ref());
    }
}

TEST_CASE("mersenne twister reference vectors") {
    MersenneTwister mt;
    CHECK(mt.next_u32() == 3499211612u);
    MersenneTwister again;
    for (int i = 0; i < 9999; ++i) again.next_u32();
    CHECK(again.next_u32() == 4123659995u);
}

TEST_CASE("mersenne twister unit deviates lie in [0,1) and equal x / 2^32") {
    MersenneTwister a(7), b(7);
    for (int i = 0; i < 1000; ++i) {
        const double u = a.next_unit();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        CHECK(u == static_cast<double>(b.next_u32()) / 4294967296.0);
    }
}

TEST_CASE("randu recurrence and odd seeding") {
    Randu r(1);
    CHECK(r.next_u31() == 65539u);
    CHECK(r.next_u31() == 393225u);
    CHECK(r.next_u31() == 1769499u);
    Randu even(2);
    CHECK(even.state() == 3u);
    Randu zero(0);
    CHECK(zero.state() == 1u);
}

TEST_CASE("randu triples satisfy x_{k+2} = 6 x_{k+1} - 9 x_k mod 2^31") {
    Randu r(12345);
    std::vector<std::int64_t> x(100002);
    for (auto& v : x) v = r.next_u31();
    for (std::size_t k = 0; k + 2 < x.size(); ++k) {
        const std::int64_t lhs = x[k + 2];
        const std::int64_t rhs = ((6 * x[k + 1] - 9 * x[k]) % 2147483648LL + 2147483648LL) % 2147483648LL;
        REQUIRE(lhs == rhs);
    }
}

TEST_CASE("rng state dispatches to the chosen generator") {
    auto mt = RngState::mersenne_twister(3);
    auto ru = RngState::randu(3);
    CHECK(mt.kind() == GeneratorKind::MersenneTwister);
    CHECK(ru.kind() == GeneratorKind::Randu);
    CHECK(mt.as_randu() == nullptr);
    CHECK(ru.as_mersenne_twister() == nullptr);
    MersenneTwister ref(3);
    CHECK(mt.next_unit() == ref.next_unit());
    CHECK(ru.next_unit() == 196617.0 / 2147483648.0);
}

TEST_CASE("derive_seed follows the splitmix fold") {
    const std::uint64_t base = 0x1234;
    std::uint64_t h = base;
    for (std::uint64_t c : {1ull, 2ull, 3ull}) h = mix64(h + kGoldenGamma) ^ c;
    CHECK(derive_seed(base, {1, 2, 3}) == mix64(h));
    CHECK(derive_seed(base, {}) == mix64(base));
    const std::vector<std::uint64_t> ctx = {1, 2, 3};
    CHECK(derive_seed(SeedRecipe{base, ctx}) == derive_seed(base, std::span<const std::uint64_t>(ctx)));
    CHECK(mix64(0) == 0);
    CHECK(mix64(kGoldenGamma) == 0xE220A8397B1DCDAFull);
}

TEST_CASE("derive_seed is injective over a full experiment grid") {
    std::set<std::uint64_t> seen;
    std::size_t count = 0;
    for (std::uint64_t base : {1ull, 2ull}) {
        for (std::uint64_t s = 0; s < 5; ++s)
            for (std::uint64_t f = 1; f <= 24; ++f)
                for (std::uint64_t r = 0; r < 100; ++r, ++count) seen.insert(derive_seed(base, {1, s, f, r}));
        for (std::uint64_t f = 1; f <= 24; ++f, ++count) seen.insert(derive_seed(base, {2, f, 0, 0}));
        for (std::uint64_t s = 0; s < 50; ++s, ++count) seen.insert(derive_seed(base, {3, s}));
    }
    CHECK(seen.size() == count);
}

TEST_CASE("fold_seed32 xors the two words") {
    static_assert(fold_seed32(0x0000000100000002ull) == 3u);
    CHECK(fold_seed32(0xFFFFFFFF00000000ull) == 0xFFFFFFFFu);
}

TEST_CASE("uniform_below stays in range and covers every value") {
    MersenneTwister mt(11);
    std::vector<int> hits(7, 0);
    for (int i = 0; i < 7000; ++i) {
        const auto v = uniform_below(mt, 7);
        REQUIRE(v < 7u);
        ++hits[v];
    }
    for (int h : hits) CHECK(h > 800);
    CHECK(uniform_below(mt, 1) == 0u);
}

TEST_CASE("standard_normal has unit moments") {
    MersenneTwister mt(5);
    double s = 0.0, s2 = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double z = standard_normal(mt);
        s += z;
        s2 += z * z;
    }
    CHECK(std::abs(s / n) < 0.01);
    CHECK(std::abs(s2 / n - 1.0) < 0.02);
}

TEST_CASE("shuffle is a permutation and deterministic") {
    std::vector<int> a(50), b(50);
    for (int i = 0; i < 50; ++i) a[i] = b[i] = i;
    MersenneTwister m1(9), m2(9);
    shuffle(m1, std::span<int>(a));
    shuffle(m2, std::span<int>(b));
    CHECK(a == b);
    std::vector<int> sorted = a;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < 50; ++i) CHECK(sorted[i] == i);
    CHECK(a != sorted);
}
