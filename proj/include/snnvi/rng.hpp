#pragma once

#include <cstdint>
#include <initializer_list>

namespace snnvi {

// Counter-based random stream (Philox4x32-10).
//
// A stream is identified by (seed, stream_id). The i-th 64-bit draw of a
// stream is a pure function of (seed, stream_id, i), so draws can be taken
// sequentially through the cursor or at arbitrary indices from parallel
// workers without coordination. Distinct stream_ids occupy disjoint Philox
// counter blocks and therefore never overlap.
//
// Gaussian draws use Box-Muller (cosine branch) and consume exactly two raw
// 64-bit draws per sample.
class RngStream {
  public:
    RngStream() : RngStream(0, 0) {}
    RngStream(uint64_t seed, uint64_t stream_id = 0)
        : seed_(seed), stream_(stream_id) {}

    uint64_t seed() const { return seed_; }
    uint64_t stream_id() const { return stream_; }
    uint64_t cursor() const { return cursor_; }

    // Stateless random access.
    uint64_t u64_at(uint64_t i) const;
    double uniform_at(uint64_t i) const;   // open interval (0,1)
    double gaussian_at(uint64_t i) const;  // reads raw draws 2i and 2i+1

    // Sequential access; advances the cursor.
    uint64_t next_u64() { return u64_at(cursor_++); }
    double next_uniform() { return uniform_at(cursor_++); }
    double next_gaussian() {
        cursor_ += cursor_ % 2;  // gaussian draws sit on even raw offsets
        double z = gaussian_at(cursor_ / 2);
        cursor_ += 2;
        return z;
    }

    // Independent child stream; the parent is not advanced.
    RngStream substream(uint64_t tag) const {
        return RngStream(seed_, mix(stream_, tag));
    }

    static uint64_t mix(uint64_t a, uint64_t b);

  private:
    uint64_t seed_;
    uint64_t stream_;
    uint64_t cursor_ = 0;
};

// mean + std * eps with eps ~ N(0,1); consumes two raw draws.
// Throws std::invalid_argument for negative std.
double gaussian_sample(RngStream& rng, double mean, double std);

// Stream addressed by a path of indices, e.g. {epoch, batch, sample}.
RngStream derive_stream(uint64_t seed, std::initializer_list<uint64_t> path);

// Raw Philox4x32-10 block, exposed for known-answer tests.
void philox4x32_10(const uint32_t ctr[4], const uint32_t key[2], uint32_t out[4]);

}  // namespace snnvi
