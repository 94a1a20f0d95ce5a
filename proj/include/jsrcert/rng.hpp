#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>

namespace jsrcert {

/// splitmix64 stream: the state advances by a fixed odd constant and each
/// output is a bijective mix of the state, so draw k is a pure function of
/// (seed, k). Reproducible across platforms by construction.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ull;
        ++calls_;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Standard normal via Box-Muller; the sine mate of each pair is cached.
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(t);
        have_spare_ = true;
        return r * std::cos(t);
    }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t calls() const { return calls_; }

    std::string trace() const {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "seed=%llu,offset=%llu",
                      static_cast<unsigned long long>(seed_), static_cast<unsigned long long>(calls_));
        return buf;
    }

private:
    std::uint64_t seed_;
    std::uint64_t state_;
    std::uint64_t calls_ = 0;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

/// Stateless fan-out of one master seed into independent stream seeds.
inline std::uint64_t split_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0) {
    std::uint64_t z = base ^ (a * 0xD1B54A32D192ED03ull) ^ (b * 0x8CB92BA72F3D8DD7ull);
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

}  // namespace jsrcert
