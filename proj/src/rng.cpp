#include "snnvi/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace snnvi {

namespace {

constexpr uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void philox_round(uint32_t ctr[4], const uint32_t key[2]) {
    const uint64_t p0 = uint64_t(kPhiloxM0) * ctr[0];
    const uint64_t p1 = uint64_t(kPhiloxM1) * ctr[2];
    const uint32_t hi0 = uint32_t(p0 >> 32), lo0 = uint32_t(p0);
    const uint32_t hi1 = uint32_t(p1 >> 32), lo1 = uint32_t(p1);
    const uint32_t c1 = ctr[1], c3 = ctr[3];
    ctr[0] = hi1 ^ c1 ^ key[0];
    ctr[1] = lo1;
    ctr[2] = hi0 ^ c3 ^ key[1];
    ctr[3] = lo0;
}

// Maps a 64-bit word to a double in the open interval (0,1).
inline double u64_to_open01(uint64_t x) {
    return double(x >> 11) * 0x1.0p-53 + 0x1.0p-54;
}

}  // namespace

void philox4x32_10(const uint32_t ctr_in[4], const uint32_t key_in[2], uint32_t out[4]) {
    uint32_t c[4] = {ctr_in[0], ctr_in[1], ctr_in[2], ctr_in[3]};
    uint32_t k[2] = {key_in[0], key_in[1]};
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            k[0] += kPhiloxW0;
            k[1] += kPhiloxW1;
        }
        philox_round(c, k);
    }
    out[0] = c[0];
    out[1] = c[1];
    out[2] = c[2];
    out[3] = c[3];
}

uint64_t RngStream::u64_at(uint64_t i) const {
    // One Philox block yields two 64-bit words; block index = i/2.
    const uint64_t block = i >> 1;
    const uint32_t ctr[4] = {uint32_t(block), uint32_t(block >> 32),
                             uint32_t(stream_), uint32_t(stream_ >> 32)};
    const uint32_t key[2] = {uint32_t(seed_), uint32_t(seed_ >> 32)};
    uint32_t out[4];
    philox4x32_10(ctr, key, out);
    if ((i & 1) == 0) return uint64_t(out[0]) | (uint64_t(out[1]) << 32);
    return uint64_t(out[2]) | (uint64_t(out[3]) << 32);
}

double RngStream::uniform_at(uint64_t i) const { return u64_to_open01(u64_at(i)); }

double RngStream::gaussian_at(uint64_t i) const {
    const double u1 = uniform_at(2 * i);
    const double u2 = uniform_at(2 * i + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

uint64_t RngStream::mix(uint64_t a, uint64_t b) {
    uint64_t z = a ^ (b + 0x9E3779B97F4A7C15ull + (a << 6) + (a >> 2));
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
}

double gaussian_sample(RngStream& rng, double mean, double std) {
    if (!(std >= 0.0))
        throw std::invalid_argument("gaussian_sample: std must be >= 0");
    return mean + std * rng.next_gaussian();
}

RngStream derive_stream(uint64_t seed, std::initializer_list<uint64_t> path) {
    RngStream s(seed, 0);
    for (uint64_t tag : path) s = s.substream(tag);
    return s;
}

}  // namespace snnvi
