#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>

namespace bnmf {

/// Counter-based random stream (Philox4x32-10).
///
/// A stream is identified by (seed, stream_id); its state is the single
/// integer `position`, the number of 64-bit words consumed so far. Two streams
/// with the same triple produce the same words on every platform, and any
/// position can be reached without replaying the prefix.
class CounterRng {
  public:
    CounterRng() = default;
    explicit CounterRng(std::uint64_t seed, std::uint64_t stream_id = 0,
                        std::uint64_t position = 0) noexcept
        : seed_(seed), stream_(stream_id), position_(position) {}

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream_id() const noexcept { return stream_; }
    std::uint64_t position() const noexcept { return position_; }

    /// Next raw 64-bit word.
    std::uint64_t next_u64() noexcept;

    /// Uniform on the open interval (0, 1); never returns 0 or 1.
    double uniform_open() noexcept;

    /// Uniform integer in [0, bound); bound must be positive.
    std::uint64_t uniform_below(std::uint64_t bound) noexcept;

    /// Standard normal via Box–Muller (cosine branch only, two words per draw).
    double standard_normal() noexcept;

    /// Independent child stream; children of distinct ids never collide with
    /// each other or with the parent.
    CounterRng split(std::uint64_t child_id) const noexcept;

    friend bool operator==(const CounterRng&, const CounterRng&) = default;

  private:
    std::uint64_t seed_ = 0;
    std::uint64_t stream_ = 0;
    std::uint64_t position_ = 0;
};

/// Philox4x32-10 block function, exposed for known-answer tests.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) noexcept;

/// SplitMix64 finalizer; used to derive per-cell seeds from a base seed.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Combines a base seed with a list of integer tags into a derived seed.
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> tags) noexcept;

} // namespace bnmf
