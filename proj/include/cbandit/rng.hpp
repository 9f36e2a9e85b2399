#pragma once

#include <cstdint>
#include <vector>

namespace cbandit {

// Counter-based pseudo-random generator built on the SplitMix64 finalizer.
// Output i of a stream with key k is mix64(k + (i+1)*GOLDEN), so streams are
// stateless apart from the counter and can be split by deriving child keys.
// Substreams: child key = mix64(parent_key ^ mix64(tag + GOLDEN)).
class Rng {
public:
    explicit Rng(std::uint64_t key) : key_(key) {}

    static constexpr std::uint64_t GOLDEN = 0x9e3779b97f4a7c15ULL;

    static std::uint64_t mix64(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xbf58476d1ce4e5b9ULL;
        z ^= z >> 27;
        z *= 0x94d049bb133111ebULL;
        z ^= z >> 31;
        return z;
    }

    // Deterministic substream derivation; independent for distinct tags.
    Rng split(std::uint64_t tag) const {
        return Rng(mix64(key_ ^ mix64(tag + GOLDEN)));
    }
    Rng split2(std::uint64_t tag_a, std::uint64_t tag_b) const {
        return split(tag_a).split(tag_b);
    }

    std::uint64_t next_u64() {
        counter_ += GOLDEN;
        return mix64(key_ + counter_);
    }

    // Uniform double in [0, 1), 53 random bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform integer in [0, n). Lemire multiply-shift; bias < n * 2^-64.
    std::uint64_t next_below(std::uint64_t n) {
        unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * n;
        return static_cast<std::uint64_t>(m >> 64);
    }

    bool bernoulli(double p) { return next_double() < p; }

    std::uint64_t key() const { return key_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

// Inverse-CDF draw from an explicit probability vector (weights need not be
// normalized; a single uniform is consumed).
inline std::size_t sample_index(const std::vector<double>& weights, Rng& rng) {
    double total = 0.0;
    for (double w : weights) total += w;
    const double u = rng.next_double() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        acc += weights[i];
        if (u < acc) return i;
    }
    return weights.size() - 1;
}

}  // namespace cbandit
