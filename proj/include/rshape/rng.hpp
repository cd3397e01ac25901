#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <optional>

namespace rshape {

/// Philox4x32-10 counter-based block generator (Salmon et al., SC'11).
///
/// Maps a 128-bit counter and a 64-bit key to 128 pseudo-random bits.
struct Philox4x32 {
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter block(Counter ctr, Key key) noexcept;
};

/// Reproducible random stream identified by (seed, realization, substream).
///
/// Streams with different identities are statistically independent, and a
/// stream's output depends only on its identity, never on how many other
/// streams were consumed before it. Satisfies UniformRandomBitGenerator.
class Rng {
  public:
    using result_type = std::uint64_t;

    Rng(std::uint64_t seed, std::uint64_t realization, std::uint32_t substream = 0) noexcept;

    /// Independent child stream; the same tag always yields the same child.
    Rng child(std::uint32_t tag) const noexcept;

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }
    result_type operator()() noexcept;

    /// Uniform on the open interval (0, 1).
    double uniform() noexcept;
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
    /// Standard normal via Box-Muller.
    double normal() noexcept;
    /// Laplace(0, 1) via the inverse CDF.
    double laplace() noexcept;
    /// Cauchy(0, 1) via the inverse CDF.
    double cauchy() noexcept;
    /// Uniform integer in [0, bound).
    std::uint64_t below(std::uint64_t bound) noexcept;

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t realization() const noexcept { return realization_; }
    std::uint32_t substream() const noexcept { return substream_; }

  private:
    void refill() noexcept;

    std::uint64_t seed_;
    std::uint64_t realization_;
    std::uint32_t substream_;
    std::uint32_t block_index_ = 0;
    Philox4x32::Counter buffer_{};
    int buffered_ = 0;
    std::optional<double> spare_normal_;
};

}  // namespace rshape
