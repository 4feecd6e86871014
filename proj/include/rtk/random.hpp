#pragma once

#include <cstdint>
#include <string_view>

namespace rtk {

/// Portable SplitMix64 stream. Streams are never shared between threads;
/// independent streams are derived instead.
///
/// Derivation of a stream from (global_seed, sample_id, property_id,
/// candidate_index):
///
///     s = mix(global_seed)
///     s = mix(s ^ fnv1a64(sample_id))
///     s = mix(s ^ fnv1a64(property_id))
///     s = mix(s ^ candidate_index)
///
/// where mix(x) is one SplitMix64 output step applied to state x
/// (x + 0x9E3779B97F4A7C15 followed by the SplitMix64 finalizer) and fnv1a64
/// is 64-bit FNV-1a over the UTF-8 bytes.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t state = 0) noexcept : state_(state) {}

    static RandomStream derive(std::uint64_t global_seed, std::string_view sample_id,
                               std::string_view property_id,
                               std::uint64_t candidate_index) noexcept;

    std::uint64_t next_u64() noexcept;
    /// Top 53 bits of next_u64() scaled into [0,1).
    double next_uniform() noexcept;
    /// Box-Muller on two uniforms: sigma * sqrt(-2 ln(1-u1)) * cos(2 pi u2).
    /// Always consumes exactly two uniforms; sigma == 0 yields exactly 0.0.
    double next_normal(double sigma) noexcept;

    std::uint64_t state() const noexcept { return state_; }

private:
    std::uint64_t state_;
};

std::uint64_t splitmix64_mix(std::uint64_t x) noexcept;
std::uint64_t fnv1a64(std::string_view bytes) noexcept;

}  // namespace rtk
