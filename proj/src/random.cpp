#include "rtk/random.hpp"

#include <cmath>
#include <numbers>

namespace rtk {

namespace {

constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t finalize(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace

std::uint64_t splitmix64_mix(std::uint64_t x) noexcept { return finalize(x + kGamma); }

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

RandomStream RandomStream::derive(std::uint64_t global_seed, std::string_view sample_id,
                                  std::string_view property_id,
                                  std::uint64_t candidate_index) noexcept {
    std::uint64_t s = splitmix64_mix(global_seed);
    s = splitmix64_mix(s ^ fnv1a64(sample_id));
    s = splitmix64_mix(s ^ fnv1a64(property_id));
    s = splitmix64_mix(s ^ candidate_index);
    return RandomStream(s);
}

std::uint64_t RandomStream::next_u64() noexcept {
    state_ += kGamma;
    return finalize(state_);
}

double RandomStream::next_uniform() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RandomStream::next_normal(double sigma) noexcept {
    const double u1 = next_uniform();
    const double u2 = next_uniform();
    if (sigma == 0.0) return 0.0;
    const double r = std::sqrt(-2.0 * std::log(1.0 - u1));
    return sigma * r * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace rtk
