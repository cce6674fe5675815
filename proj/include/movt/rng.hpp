#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <numbers>
#include <vector>

namespace movt {

// Deterministic PRNG with identical output on every platform. The standard
// distributions are implementation-defined, which would break byte-for-byte
// reproducibility of generated datasets and initial weights, so sampling is
// done here from first principles on top of a splitmix64 stream.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1) with 53 random bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // Unbiased integer in [0, n) by rejection.
    std::uint64_t next_below(std::uint64_t n) {
        if (n == 0) return 0;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v = next_u64();
        while (v >= limit) v = next_u64();
        return v % n;
    }

    // Standard normal via Box-Muller; the spare value is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = next_double();
        while (u1 <= 0.0) u1 = next_double();
        const double u2 = next_double();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(next_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    // Sorted sample of k distinct indices from [0, n) (selection sampling).
    std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k) {
        std::vector<std::size_t> out;
        out.reserve(k);
        std::size_t remaining = n, needed = k;
        for (std::size_t i = 0; i < n && needed > 0; ++i) {
            if (next_below(remaining) < needed) {
                out.push_back(i);
                --needed;
            }
            --remaining;
        }
        return out;
    }

    // Derives an independent stream for a named purpose so that adding a
    // consumer never shifts the values another consumer sees.
    Rng derive(std::uint64_t stream_id) const {
        std::uint64_t z = state_ ^ (0x6a09e667f3bcc908ULL + stream_id * 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 33)) * 0xff51afd7ed558ccdULL;
        z = (z ^ (z >> 33)) * 0xc4ceb9fe1a85ec53ULL;
        return Rng(z ^ (z >> 33));
    }

    // Seed for Rng(state()) reconstructing this stream's remaining integer
    // output. A spare normal() value, if cached, is not carried over.
    std::uint64_t state() const { return state_; }

  private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace movt
