#pragma once

#include <cstdint>
#include <random>

#include <boost/random/normal_distribution.hpp>

namespace klim {

/// Reproducibility contract: every random quantity is drawn from a substream
/// that is a pure function of (master_seed, domain, index), never of thread
/// identity or scheduling order.
struct RngPolicy {
    std::uint64_t master_seed = 0;
};

/// Disjoint uses of the same master seed draw from different domains.
enum class StreamDomain : std::uint64_t {
    path_noise = 1,
    initial_law = 2,
    density_sampler = 3,
    property_test = 4,
};

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// 64-bit seed of substream `index` in `domain`.
constexpr std::uint64_t substream_seed(std::uint64_t master_seed, StreamDomain domain,
                                       std::uint64_t index) noexcept {
    return mix64(mix64(master_seed ^ mix64(static_cast<std::uint64_t>(domain))) + index);
}

/// One independent random stream: Mersenne Twister engine plus ziggurat normals.
class Substream {
public:
    Substream(const RngPolicy& policy, StreamDomain domain, std::uint64_t index)
        : engine_(substream_seed(policy.master_seed, domain, index)) {}

    double normal() { return normal_(engine_); }
    /// Uniform on [0, 1).
    double uniform() { return std::generate_canonical<double, 64>(engine_); }
    std::mt19937_64& engine() noexcept { return engine_; }

private:
    std::mt19937_64 engine_;
    boost::random::normal_distribution<double> normal_;
};

}  // namespace klim
