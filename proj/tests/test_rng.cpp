#include "doctest.h"

#include "rxva/parallel.hpp"
#include "rxva/rng.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <vector>

using namespace rxva;

TEST_SUITE("rng") {

TEST_CASE("philox known-answer vectors") {
    // Reference outputs of the Random123 philox4x32-10 implementation.
    const auto zero = philox4x32({0, 0, 0, 0}, {0, 0});
    CHECK(zero == std::array<std::uint32_t, 4>{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    const auto ones = philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                 {0xffffffffu, 0xffffffffu});
    CHECK(ones == std::array<std::uint32_t, 4>{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
    const auto pi = philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                               {0xa4093822u, 0x299f31d0u});
    CHECK(pi == std::array<std::uint32_t, 4>{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("streams and paths are independent and reproducible") {
    PathRng a(7, Stream::kStock, 3), b(7, Stream::kStock, 3), c(7, Stream::kRegime, 3),
        d(7, Stream::kStock, 4);
    for (int i = 0; i < 100; ++i) {
        const double x = a.uniform();
        CHECK(x == b.uniform());
        CHECK(x != c.uniform());
        CHECK(x != d.uniform());
        CHECK(x > 0.0);
        CHECK(x < 1.0);
    }
}

TEST_CASE("normal and exponential moments") {
    PathRng rng(11, Stream::kStock, 0);
    const int n = 200000;
    double s = 0.0, ss = 0.0, e = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = rng.normal();
        s += x;
        ss += x * x;
        e += rng.exponential(2.0);
    }
    CHECK(std::abs(s / n) < 4.0 / std::sqrt(n));
    CHECK(std::abs(ss / n - 1.0) < 4.0 * std::sqrt(2.0 / n));
    CHECK(std::abs(e / n - 0.5) < 4.0 * 0.5 / std::sqrt(n));
}

TEST_CASE("parallel_chunks covers every item once for any thread count") {
    for (unsigned threads : {1u, 2u, 5u}) {
        std::vector<int> hits(10000, 0);
        parallel_chunks(hits.size(), threads, [&](std::size_t, std::size_t b, std::size_t e) {
            for (std::size_t i = b; i < e; ++i) ++hits[i];
        }, 97);
        for (int h : hits) REQUIRE(h == 1);
    }
    CHECK(chunk_count(0) == 0);
    CHECK(chunk_count(kChunkSize + 1) == 2);
}

TEST_CASE("parallel_chunks rethrows worker exceptions") {
    CHECK_THROWS_AS(parallel_chunks(10000, 3,
                                    [](std::size_t c, std::size_t, std::size_t) {
                                        if (c == 2) throw std::runtime_error("boom");
                                    },
                                    100),
                    std::runtime_error);
}

}
