#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace tailcast {

// Base class for all toolkit errors. Specific types exist so callers can
// distinguish contract violations without parsing messages.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidParams : Error { using Error::Error; };
struct OutOfSupport : Error { using Error::Error; };
struct DegenerateSample : Error { using Error::Error; };
struct LengthMismatch : Error { using Error::Error; };
struct BatchTooSmall : Error { using Error::Error; };
struct DegenerateLabels : Error { using Error::Error; };
struct ZeroDenominator : Error { using Error::Error; };
struct EmptySample : Error { using Error::Error; };
struct InvalidAlpha : Error { using Error::Error; };
struct RankDeficient : Error { using Error::Error; };
struct SeriesTooShort : Error { using Error::Error; };
struct HistoryTooShort : Error { using Error::Error; };
struct ShapeMismatch : Error { using Error::Error; };
struct NonFiniteLoss : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };
struct NonMonotoneTimestamps : Error { using Error::Error; };
struct InvalidBoundary : Error { using Error::Error; };
struct InvalidConfig : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };
struct ChecksumMismatch : Error { using Error::Error; };
struct MetricKindMismatch : Error { using Error::Error; };

// Counter-free xoshiro256** generator. Used everywhere randomness is needed
// so that streams are reproducible independent of the standard library's
// distribution implementations, and so generator state serializes as four
// plain integers.
class Rng {
public:
    explicit Rng(std::uint64_t seed) { reseed(seed); }

    void reseed(std::uint64_t seed) {
        // splitmix64 expansion of the seed into the full state.
        std::uint64_t x = seed;
        for (auto& s : state_) {
            x += 0x9e3779b97f4a7c15ULL;
            std::uint64_t z = x;
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
            s = z ^ (z >> 31);
        }
    }

    std::uint64_t next_u64() {
        auto rotl = [](std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); };
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform double in [0, 1) with 53 random bits.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform double in (0, 1]; safe as input to log().
    double next_open_double() { return 1.0 - next_double(); }

    // Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // Standard normal via Box-Muller (one value per call; the pair's
    // counterpart is discarded to keep the stream position simple).
    double normal() {
        double u1 = next_open_double();
        double u2 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    // Fisher-Yates shuffle of an index vector.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(next_u64() % i);
            std::swap(v[i - 1], v[j]);
        }
    }

    const std::uint64_t* state() const { return state_; }
    void set_state(const std::uint64_t s[4]) { for (int i = 0; i < 4; ++i) state_[i] = s[i]; }

private:
    std::uint64_t state_[4]{};
};

// Derives an independent stream seed from a base seed and a purpose tag.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag) {
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (tag + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Formats a double with enough digits to round-trip exactly.
std::string format_full(double v);

// Fixed 4-decimal formatting for human-readable tables.
std::string format_fixed4(double v);

double vec_mean(const std::vector<double>& v);
// Unbiased (n-1) variance.
double vec_variance_sample(const std::vector<double>& v);
// Population (n) variance.
double vec_variance_population(const std::vector<double>& v);

}  // namespace tailcast
