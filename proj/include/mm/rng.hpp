#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace mm {

// SplitMix64 finalizer. Used to derive independent seeds for named streams
// (training events, inference episodes) from one experiment seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Top 53 bits -> double in [0, 1).
inline double unit_real(std::uint64_t raw) {
    return static_cast<double>(raw >> 11) * 0x1.0p-53;
}

// Multiply-shift bounded reduction, one raw draw per value.
inline std::uint64_t bounded(std::uint64_t raw, std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(raw) * n) >> 64);
}

// Deterministic random source. The engine is std::mt19937_64, whose output
// sequence is fixed by the standard; the distribution functions are local
// (the std:: distributions are implementation-defined and would break
// cross-toolchain reproducibility).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    static Rng derived(std::uint64_t seed, std::uint64_t stream) {
        return Rng(mix_seed(seed, stream));
    }

    std::uint64_t next_raw() { return engine_(); }

    double uniform_real() { return unit_real(next_raw()); }

    // Uniform integer in [0, n).
    std::uint64_t uniform_index(std::uint64_t n) {
        return bounded(next_raw(), n);
    }

    bool bernoulli(double p) { return uniform_real() < p; }

    // Fisher-Yates; std::shuffle draws in an unspecified pattern.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = uniform_index(i);
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace mm
