#pragma once

#include <cstdint>
#include <random>

namespace deepratio {

// Seed derivation for independent streams.
//
// Every consumer of randomness (a simulation, a network initialisation, a
// shuffler) owns its own engine, seeded from (base seed, stream id) through a
// splitmix64 finaliser. Distinct stream ids give statistically independent
// engines, so replications and the networks of one fit can run in any order
// or in parallel without changing results.
namespace stream {
inline constexpr std::uint64_t kSimulation = 0x51;
inline constexpr std::uint64_t kNetInit = 0x1001;
inline constexpr std::uint64_t kShuffle = 0x2001;
inline constexpr std::uint64_t kValidationSplit = 0x3001;
inline constexpr std::uint64_t kLobSynth = 0x4001;
}  // namespace stream

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream_id);

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    Rng(std::uint64_t base, std::uint64_t stream_id) : engine_(derive_seed(base, stream_id)) {}

    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
    double gaussian() { return normal_(engine_); }
    double exponential(double rate) { return std::exponential_distribution<double>(rate)(engine_); }
    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace deepratio
