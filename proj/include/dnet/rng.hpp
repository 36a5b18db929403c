#ifndef DNET_RNG_HPP
#define DNET_RNG_HPP

#include <cmath>
#include <cstdint>

namespace dnet {

// splitmix64 finalizer. Integer-only, so the sequence is identical on every
// platform.
inline uint64_t mix64(uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Pure derivation of independent child streams: child(seed, i) depends only
// on its arguments. Used for per-layer init, per-image generation, per-trial
// and per-cell seeds.
inline uint64_t child_seed(uint64_t seed, uint64_t i) {
    return mix64(seed ^ (0x9E3779B97F4A7C15ull * (i + 1)));
}

// Counter-based splitmix64 generator with uniform and Box-Muller Gaussian
// draws. Identical seed => identical draw sequence.
class SeededRng {
public:
    explicit SeededRng(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ull;
        return mix64(state_);
    }

    // Unbiased enough for shuffles and index draws; modulo reduction is
    // deliberate (documented, deterministic).
    uint64_t next_below(uint64_t bound) { return next_u64() % bound; }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

    // Standard normal via Box-Muller; the pair is cached so consecutive
    // draws consume one uniform pair per two samples.
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    uint64_t state() const { return state_; }

private:
    uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace dnet

#endif
