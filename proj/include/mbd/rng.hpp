#ifndef MBD_RNG_HPP
#define MBD_RNG_HPP

#include <cstdint>
#include <random>
#include <vector>

namespace mbd {

std::uint64_t splitmix64(std::uint64_t x);

// Seeded random source with portable helpers. The standard distributions
// (uniform_int_distribution etc.) are implementation-defined, so everything
// that must be bit-reproducible across toolchains is implemented here on top
// of the fully specified mt19937_64 stream.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

    std::uint64_t seed() const { return seed_; }
    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1), 53 bits of precision.
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform index in [0, n); n must be > 0.
    std::size_t next_index(std::size_t n);

    // Box-Muller transform, one value per two draws.
    double next_gaussian(double mean, double stddev);

    // Fisher-Yates; std::shuffle is not portable across standard libraries.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        if (v.size() < 2) return;
        for (std::size_t i = v.size() - 1; i > 0; --i) {
            std::size_t j = next_index(i + 1);
            std::swap(v[i], v[j]);
        }
    }

    // Independent, deterministic child stream.
    Rng fork(std::uint64_t stream) const { return Rng(splitmix64(seed_ ^ splitmix64(stream))); }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

// Deterministic sub-seed derivation for per-position / per-restart / per-point
// streams.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(seed ^ splitmix64(stream));
}

} // namespace mbd

#endif
