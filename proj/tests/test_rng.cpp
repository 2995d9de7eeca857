#include "snnvi/rng.hpp"

#include <cmath>
#include <set>
#include <stdexcept>
#include <vector>

#include "doctest.h"

using snnvi::RngStream;

TEST_CASE("philox4x32-10 known-answer vectors") {
    // Reference vectors from the Random123 distribution (kat_vectors).
    {
        const uint32_t ctr[4] = {0, 0, 0, 0};
        const uint32_t key[2] = {0, 0};
        uint32_t out[4];
        snnvi::philox4x32_10(ctr, key, out);
        CHECK(out[0] == 0x6627e8d5u);
        CHECK(out[1] == 0xe169c58du);
        CHECK(out[2] == 0xbc57ac4cu);
        CHECK(out[3] == 0x9b00dbd8u);
    }
    {
        const uint32_t ctr[4] = {0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu};
        const uint32_t key[2] = {0xffffffffu, 0xffffffffu};
        uint32_t out[4];
        snnvi::philox4x32_10(ctr, key, out);
        CHECK(out[0] == 0x408f276du);
        CHECK(out[1] == 0x41c83b0eu);
        CHECK(out[2] == 0xa20bc7c6u);
        CHECK(out[3] == 0x6d5451fdu);
    }
    {
        const uint32_t ctr[4] = {0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u};
        const uint32_t key[2] = {0xa4093822u, 0x299f31d0u};
        uint32_t out[4];
        snnvi::philox4x32_10(ctr, key, out);
        CHECK(out[0] == 0xd16cfe09u);
        CHECK(out[1] == 0x94fdccebu);
        CHECK(out[2] == 0x5001e420u);
        CHECK(out[3] == 0x24126ea1u);
    }
}

TEST_CASE("same (seed, stream) reproduces the sequence") {
    RngStream a(42, 7), b(42, 7);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
    CHECK(a.gaussian_at(13) == b.gaussian_at(13));
    RngStream c(42, 7);
    CHECK(snnvi::gaussian_sample(c, 1.5, 2.0) == snnvi::gaussian_sample(b = RngStream(42, 7), 1.5, 2.0));
}

TEST_CASE("random access agrees with sequential access") {
    RngStream a(9001, 3);
    std::vector<uint64_t> seq;
    for (int i = 0; i < 64; ++i) seq.push_back(a.next_u64());
    RngStream b(9001, 3);
    for (int i = 63; i >= 0; --i) CHECK(b.u64_at(uint64_t(i)) == seq[size_t(i)]);
}

TEST_CASE("distinct streams do not collide over 1e4 draws") {
    RngStream s0(123, 0), s1(123, 1);
    std::set<uint64_t> seen;
    for (int i = 0; i < 10000; ++i) {
        CHECK(seen.insert(s0.next_u64()).second);
        CHECK(seen.insert(s1.next_u64()).second);
    }
}

TEST_CASE("substreams differ from parent and from each other") {
    RngStream root(5, 0);
    auto a = root.substream(0);
    auto b = root.substream(1);
    CHECK(a.stream_id() != b.stream_id());
    CHECK(a.u64_at(0) != b.u64_at(0));
    auto nested = a.substream(1);
    CHECK(nested.u64_at(0) != b.u64_at(0));
    auto derived = snnvi::derive_stream(5, {0, 1});
    CHECK(derived.u64_at(0) == nested.u64_at(0));
}

TEST_CASE("gaussian_sample zero std returns the mean") {
    RngStream rng(1, 0);
    CHECK(snnvi::gaussian_sample(rng, 3.0, 0.0) == 3.0);
}

TEST_CASE("gaussian_sample rejects negative std") {
    RngStream rng(1, 0);
    CHECK_THROWS_AS(snnvi::gaussian_sample(rng, 0.0, -1.0), std::invalid_argument);
}

TEST_CASE("gaussian moments over 1e6 draws") {
    RngStream rng(2024, 0);
    const int n = 1000000;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n; ++i) {
        double z = rng.next_gaussian();
        sum += z;
        sumsq += z * z;
    }
    const double mean = sum / n;
    const double var = sumsq / n - mean * mean;
    CHECK(std::abs(mean) < 0.01);
    CHECK(std::abs(var - 1.0) < 0.02);
}

TEST_CASE("uniforms stay inside the open unit interval") {
    RngStream rng(77, 4);
    for (int i = 0; i < 10000; ++i) {
        double u = rng.next_uniform();
        CHECK(u > 0.0);
        CHECK(u < 1.0);
    }
}
