#pragma once

// Counter-style stream derivation: every (seed, replication, channel) triple
// maps to its own generator, so results do not depend on scheduling.

#include <cstdint>
#include <random>

namespace sphereqv {

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Stream id for one replication and channel (the degree l for per-degree draws).
std::uint64_t derive_stream_id(std::uint64_t seed, std::uint64_t replication, std::uint64_t channel);

class RngStream {
public:
    explicit RngStream(std::uint64_t stream_id);
    RngStream(std::uint64_t seed, std::uint64_t replication, std::uint64_t channel);

    std::uint64_t id() const { return id_; }
    double normal();
    double uniform();

private:
    std::uint64_t id_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace sphereqv
