#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace fog {

// Seed derivation: every random stream in the pipeline is keyed by
// (root seed, purpose label, up to two integer qualifiers). Subcommands that
// share (root, label, a, b) therefore see identical streams, which is what
// makes reruns and the federated-vs-centralized equality checks bit-stable.
inline std::uint64_t derive_seed(std::uint64_t root, std::string_view label,
                                 std::uint64_t a = 0, std::uint64_t b = 0) {
    std::uint64_t s = root;
    auto mix = [&s](std::uint64_t v) {
        s ^= v + 0x9E3779B97F4A7C15ULL + (s << 6) + (s >> 2);
        s ^= s >> 30;
        s *= 0xBF58476D1CE4E5B9ULL;
        s ^= s >> 27;
    };
    std::uint64_t h = 1469598103934665603ULL;  // FNV-1a over the label
    for (char ch : label) {
        h ^= static_cast<unsigned char>(ch);
        h *= 1099511628211ULL;
    }
    mix(h);
    mix(a);
    mix(b);
    return s;
}

// Deterministic PRNG wrapper. mt19937_64 output is fully specified by the
// standard; the distributions and shuffle below are hand-rolled because the
// std:: counterparts are implementation-defined and would break cross-build
// reproducibility of archives and weight containers.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    // uniform in [0, 1) with 53 random bits
    double uniform01() {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // standard normal via Box-Muller, spare value cached
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform01();
        double u2 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(t);
        has_spare_ = true;
        return r * std::cos(t);
    }

    // uniform integer in [0, n) via 128-bit multiply (no modulo bias worth
    // caring about at these ranges, and bit-stable across platforms)
    std::size_t below(std::size_t n) {
        return static_cast<std::size_t>(
            (static_cast<unsigned __int128>(next()) * n) >> 64);
    }

    template <typename Vec>
    void shuffle(Vec& v) {  // Fisher-Yates
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = below(i);
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace fog
