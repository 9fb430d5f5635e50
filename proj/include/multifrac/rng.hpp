#pragma once

#include <cmath>
#include <cstdint>

namespace multifrac {

// Counter-based random numbers (Philox4x32-10). Every draw is addressed by
// (seed, domain, stream, index), so regeneration is bit-exact no matter how
// work is split across threads. Domains keep logically distinct consumers
// (driver noise, fBm oracle, Hurst drivers) on independent key schedules.

enum class RngDomain : std::uint32_t {
    driver_noise = 0,
    fbm_oracle = 1,
    hurst_driver = 2,
};

namespace detail {

inline constexpr std::uint32_t kPhiloxW32A = 0x9E3779B9u;
inline constexpr std::uint32_t kPhiloxW32B = 0xBB67AE85u;
inline constexpr std::uint32_t kPhiloxM4x32A = 0xD2511F53u;
inline constexpr std::uint32_t kPhiloxM4x32B = 0xCD9E8D57u;

struct PhiloxBlock {
    std::uint32_t x[4];
};

inline void philox_round(std::uint32_t counter[4], const std::uint32_t key[2]) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM4x32A) * counter[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM4x32B) * counter[2];
    const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
    const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
    const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
    counter[0] = hi1 ^ counter[1] ^ key[0];
    counter[1] = lo1;
    counter[2] = hi0 ^ counter[3] ^ key[1];
    counter[3] = lo0;
}

inline PhiloxBlock philox4x32_10(std::uint32_t c0, std::uint32_t c1, std::uint32_t c2,
                                 std::uint32_t c3, std::uint32_t k0, std::uint32_t k1) {
    std::uint32_t counter[4] = {c0, c1, c2, c3};
    std::uint32_t key[2] = {k0, k1};
    for (int round = 0; round < 10; ++round) {
        philox_round(counter, key);
        key[0] += kPhiloxW32A;
        key[1] += kPhiloxW32B;
    }
    return PhiloxBlock{{counter[0], counter[1], counter[2], counter[3]}};
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

}  // namespace detail

/// Addressable stream of standard-normal draws for one (seed, domain, stream).
class NormalStream {
public:
    NormalStream(std::uint64_t seed, RngDomain domain, std::uint64_t stream_id)
        : stream_lo_(static_cast<std::uint32_t>(stream_id)),
          stream_hi_(static_cast<std::uint32_t>(stream_id >> 32)) {
        const std::uint64_t key =
            detail::splitmix64(seed ^ (0xA076BE5C0F1D2E3Bull *
                                       (static_cast<std::uint64_t>(domain) + 1)));
        key_lo_ = static_cast<std::uint32_t>(key);
        key_hi_ = static_cast<std::uint32_t>(key >> 32);
    }

    /// i-th standard normal of the stream; same i always gives the same value.
    double normal(std::uint64_t i) const {
        const std::uint64_t block = i >> 1;
        const auto b = detail::philox4x32_10(static_cast<std::uint32_t>(block),
                                             static_cast<std::uint32_t>(block >> 32),
                                             stream_lo_, stream_hi_, key_lo_, key_hi_);
        const double u1 = to_unit(b.x[0], b.x[1]);
        const double u2 = to_unit(b.x[2], b.x[3]);
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double phi = 6.283185307179586476925286766559 * u2;
        return (i & 1u) ? r * std::sin(phi) : r * std::cos(phi);
    }

    /// Fills out[0..n) with normals at indices first..first+n. Uses whole
    /// blocks where possible (two normals per Philox block).
    void fill_normals(std::uint64_t first, double* out, std::uint64_t n) const {
        std::uint64_t i = first;
        std::uint64_t k = 0;
        while (k < n && (i & 1u)) {
            out[k++] = normal(i++);
        }
        while (k + 2 <= n) {
            const std::uint64_t block = i >> 1;
            const auto b = detail::philox4x32_10(static_cast<std::uint32_t>(block),
                                                 static_cast<std::uint32_t>(block >> 32),
                                                 stream_lo_, stream_hi_, key_lo_, key_hi_);
            const double u1 = to_unit(b.x[0], b.x[1]);
            const double u2 = to_unit(b.x[2], b.x[3]);
            const double r = std::sqrt(-2.0 * std::log(u1));
            const double phi = 6.283185307179586476925286766559 * u2;
            out[k] = r * std::cos(phi);
            out[k + 1] = r * std::sin(phi);
            i += 2;
            k += 2;
        }
        while (k < n) {
            out[k++] = normal(i++);
        }
    }

private:
    // 53-bit uniform in (0, 1].
    static double to_unit(std::uint32_t lo, std::uint32_t hi) {
        const std::uint64_t v = (static_cast<std::uint64_t>(hi) << 32) | lo;
        return static_cast<double>((v >> 11) + 1) * 0x1.0p-53;
    }

    std::uint32_t stream_lo_, stream_hi_;
    std::uint32_t key_lo_, key_hi_;
};

}  // namespace multifrac
