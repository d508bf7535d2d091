#pragma once

#include <array>
#include <cstdint>

#include <Eigen/Core>

namespace subgauss {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11). Stateless
// keyed block function: 128-bit counter + 64-bit key -> 128 random bits.
// Used everywhere so that parallel substreams are reproducible without
// locks: a (seed, stream) pair fully determines the output sequence, and
// results never depend on how work is scheduled across threads.
std::array<std::uint32_t, 4> philox4x32(const std::array<std::uint32_t, 4>& counter,
                                        std::uint64_t key);

// Stream ids are partitioned by purpose so independent consumers of the
// same user seed never collide.
namespace stream {
constexpr std::uint64_t kSampler = 1;
constexpr std::uint64_t kBootstrap = 2;
constexpr std::uint64_t kFind = 3;
constexpr std::uint64_t kValidate = 4;
constexpr std::uint64_t kCheck = 5;
constexpr std::uint64_t kChain = 6;

constexpr std::uint64_t id(std::uint64_t purpose, std::uint64_t index) {
    return (purpose << 56) | (index & 0x00ffffffffffffffULL);
}
}  // namespace stream

class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream)
        : seed_(seed), stream_(stream) {}

    std::uint32_t next_u32();
    std::uint64_t next_u64();

    /// Uniform on [0,1) with 53 random bits.
    double uniform();
    /// Uniform on (0,1); safe as log() argument.
    double uniform_open();
    /// Uniform on (a,b).
    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    /// Standard normal via Box-Muller (second value cached).
    double normal();
    /// Exponential with mean one.
    double exponential();
    /// Gamma(shape, 1), Marsaglia-Tsang; shape > 0.
    double gamma(double shape);

    Eigen::VectorXd normal_vector(int n);
    /// Uniform direction on the unit sphere S^{n-1}.
    Eigen::VectorXd unit_vector(int n);

private:
    void refill();

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buf_{};
    int pos_ = 4;
    double cached_normal_ = 0.0;
    bool have_cached_normal_ = false;
};

}  // namespace subgauss
