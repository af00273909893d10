#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

namespace prepbias {

inline constexpr std::uint64_t splitmix64(std::uint64_t& state) noexcept {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// Random stream for one replicate.
///
/// xoshiro256** seeded by hashing (master_seed, stream_index) through splitmix64,
/// so a replicate's draws depend only on those two numbers and never on which
/// thread runs it. All variates are built from raw 64-bit outputs with
/// hand-written transforms; std:: distributions are avoided because their
/// algorithms differ between standard libraries.
class RngStream {
public:
    using result_type = std::uint64_t;

    RngStream(std::uint64_t master_seed, std::uint64_t stream_index) noexcept
        : master_seed_(master_seed), stream_index_(stream_index) {
        std::uint64_t mix = master_seed;
        std::uint64_t key = splitmix64(mix);
        std::uint64_t state = key ^ (stream_index * 0xD1B54A32D192ED03ull + 0x8CB92BA72F3D8DD7ull);
        state = splitmix64(state) ^ stream_index;
        for (auto& word : s_) word = splitmix64(state);
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform on the open interval (0, 1).
    double uniform() noexcept {
        return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal, Marsaglia polar method.
    double normal() noexcept {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0);
        const double factor = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * factor;
        has_spare_ = true;
        return u * factor;
    }

    /// Student t with 4 degrees of freedom: Z / sqrt(V / 4) with V ~ chi^2(4).
    /// chi^2(4) is drawn as -2 log(U1 U2), a sum of two unit exponentials doubled.
    double student_t4() noexcept {
        const double z = normal();
        const double chi2 = -2.0 * std::log(uniform() * uniform());
        return z / std::sqrt(chi2 / 4.0);
    }

    /// Uniform integer in [0, bound), bound >= 1 (Lemire's multiply-shift with rejection).
    std::uint64_t uniform_index(std::uint64_t bound) noexcept {
        std::uint64_t x = (*this)();
        __uint128_t product = static_cast<__uint128_t>(x) * bound;
        auto low = static_cast<std::uint64_t>(product);
        if (low < bound) {
            const std::uint64_t threshold = (0 - bound) % bound;
            while (low < threshold) {
                x = (*this)();
                product = static_cast<__uint128_t>(x) * bound;
                low = static_cast<std::uint64_t>(product);
            }
        }
        return static_cast<std::uint64_t>(product >> 64);
    }

    std::uint64_t master_seed() const noexcept { return master_seed_; }
    std::uint64_t stream_index() const noexcept { return stream_index_; }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
        return (x << k) | (x >> (64 - k));
    }

    std::array<std::uint64_t, 4> s_{};
    std::uint64_t master_seed_;
    std::uint64_t stream_index_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace prepbias
