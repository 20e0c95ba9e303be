#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace segmamba {

/// Portable deterministic uniform generator. std::uniform_real_distribution
/// is allowed to differ between standard libraries, so the float conversion
/// is done by hand from the raw 64-bit stream.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Standard normal via Box-Muller.
    double normal();
    std::uint64_t next() { return engine_(); }
    std::uint64_t below(std::uint64_t n) { return n ? next() % n : 0; }

private:
    std::mt19937_64 engine_;
};

inline double Rng::normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

/// Derives an independent stream seed from a base seed and a label
/// (FNV-1a over the label, finalized with splitmix64).
inline std::uint64_t derive_seed(std::uint64_t base, std::string_view label) {
    std::uint64_t h = 0xcbf29ce484222325ull ^ base;
    for (unsigned char c : label) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    h += 0x9e3779b97f4a7c15ull;
    h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ull;
    h = (h ^ (h >> 27)) * 0x94d049bb133111ebull;
    return h ^ (h >> 31);
}

} // namespace segmamba
