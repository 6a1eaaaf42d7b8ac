#include "mbd/rng.hpp"

#include <cmath>

namespace mbd {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

std::size_t Rng::next_index(std::size_t n) {
    // Rejection sampling keeps the distribution exact for any n.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x = next_u64();
    while (x >= limit) x = next_u64();
    return static_cast<std::size_t>(x % n);
}

double Rng::next_gaussian(double mean, double stddev) {
    double u1 = next_unit();
    double u2 = next_unit();
    while (u1 <= 0.0) u1 = next_unit();
    const double pi = 3.14159265358979323846;
    double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * pi * u2);
    return mean + stddev * z;
}

} // namespace mbd
