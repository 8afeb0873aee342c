#pragma once

#include <cstdint>
#include <random>

namespace kinrl {

// Seeded random stream. The engine is mt19937_64, whose output sequence is
// fixed by the standard; the helpers below avoid the std distributions, whose
// algorithms are implementation-defined, so that traces match across
// toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform01() < p; }

    bool coin() { return (engine_() >> 63) != 0; }

    // Uniform integer in [0, n); n > 0. Rejection keeps it unbiased.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = (~std::uint64_t{0}) - (~std::uint64_t{0}) % n;
        std::uint64_t x = engine_();
        while (x >= limit) x = engine_();
        return x % n;
    }

private:
    std::mt19937_64 engine_;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Independent sub-stream for one purpose (topology, learning, ...) of a run.
enum class Stream : std::uint64_t { topology = 1, learning = 2, sandbox = 3 };

inline Rng make_stream(std::uint64_t seed, Stream stream) {
    return Rng(splitmix64(splitmix64(seed) ^ static_cast<std::uint64_t>(stream)));
}

}  // namespace kinrl
