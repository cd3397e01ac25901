#include "rshape/rng.hpp"

#include <cmath>
#include <numbers>

namespace rshape {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t prod = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(prod >> 32);
    lo = static_cast<std::uint32_t>(prod);
}

// murmur3 finalizer
inline std::uint32_t mix32(std::uint32_t h) {
    h ^= h >> 16;
    h *= 0x85EBCA6Bu;
    h ^= h >> 13;
    h *= 0xC2B2AE35u;
    h ^= h >> 16;
    return h;
}

}  // namespace

Philox4x32::Counter Philox4x32::block(Counter ctr, Key key) noexcept {
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, ctr[0], hi0, lo0);
        mulhilo(kMul1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
    return ctr;
}

Rng::Rng(std::uint64_t seed, std::uint64_t realization, std::uint32_t substream) noexcept
    : seed_(seed), realization_(realization), substream_(substream) {}

Rng Rng::child(std::uint32_t tag) const noexcept {
    return Rng(seed_, realization_, mix32(substream_ * kWeyl0 + mix32(tag + 1u)));
}

void Rng::refill() noexcept {
    const Philox4x32::Counter ctr{block_index_++, substream_,
                                  static_cast<std::uint32_t>(realization_),
                                  static_cast<std::uint32_t>(realization_ >> 32)};
    const Philox4x32::Key key{static_cast<std::uint32_t>(seed_),
                              static_cast<std::uint32_t>(seed_ >> 32)};
    buffer_ = Philox4x32::block(ctr, key);
    buffered_ = 4;
}

Rng::result_type Rng::operator()() noexcept {
    if (buffered_ < 2) refill();
    const std::uint64_t hi = buffer_[4 - buffered_];
    const std::uint64_t lo = buffer_[5 - buffered_];
    buffered_ -= 2;
    return (hi << 32) | lo;
}

double Rng::uniform() noexcept {
    // 53 random bits, shifted half an ulp off zero
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::normal() noexcept {
    if (spare_normal_) {
        const double z = *spare_normal_;
        spare_normal_.reset();
        return z;
    }
    const double radius = std::sqrt(-2.0 * std::log(uniform()));
    const double angle = 2.0 * std::numbers::pi * uniform();
    spare_normal_ = radius * std::sin(angle);
    return radius * std::cos(angle);
}

double Rng::laplace() noexcept {
    const double v = uniform() - 0.5;
    return v < 0 ? std::log1p(2.0 * v) : -std::log1p(-2.0 * v);
}

double Rng::cauchy() noexcept { return std::tan(std::numbers::pi * (uniform() - 0.5)); }

std::uint64_t Rng::below(std::uint64_t bound) noexcept {
    if (bound <= 1) return 0;
    // Lemire-style rejection to avoid modulo bias
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
        const std::uint64_t r = (*this)();
        if (r >= threshold) return r % bound;
    }
}

}  // namespace rshape
