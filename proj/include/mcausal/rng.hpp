#pragma once

#include <cstdint>
#include <random>

namespace mcausal {

// Seeded generator with derivable substreams. Replicate k of a run seeded
// with s draws from substream(s, k), so replicates can execute in any order
// (or in parallel) and still produce identical results.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), gen_(mix(seed)) {}

    std::uint64_t seed() const { return seed_; }

    // Independent stream for (this stream's seed, index).
    Rng substream(std::uint64_t index) const {
        return Rng(mix(seed_ + 0x9E3779B97F4A7C15ull * (index + 1)));
    }

    std::uint64_t next() { return gen_(); }

    // Uniform on (0,1); never returns 0 or 1 exactly.
    double uniform01() {
        return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
    }

    double uniform(double a, double b) { return a + (b - a) * uniform01(); }

    // Uniform integer in [0, n) by rejection, bias-free.
    std::uint64_t uniform_index(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = gen_();
        } while (x >= limit);
        return x % n;
    }

    bool bernoulli(double p) { return uniform01() < p; }

    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::swap(items[i - 1], items[uniform_index(i)]);
        }
    }

private:
    // splitmix64 finalizer; decorrelates consecutive seeds.
    static std::uint64_t mix(std::uint64_t x) {
        x += 0x9E3779B97F4A7C15ull;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
        return x ^ (x >> 31);
    }

    std::uint64_t seed_;
    std::mt19937_64 gen_;
};

}  // namespace mcausal
