#include "sphereqv/rng.hpp"

namespace sphereqv {

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_stream_id(std::uint64_t seed, std::uint64_t replication, std::uint64_t channel) {
    return mix64(mix64(mix64(seed) ^ replication) ^ (channel * 0xd1b54a32d192ed03ULL));
}

RngStream::RngStream(std::uint64_t stream_id) : id_(stream_id), engine_(stream_id) {}

RngStream::RngStream(std::uint64_t seed, std::uint64_t replication, std::uint64_t channel)
    : RngStream(derive_stream_id(seed, replication, channel)) {}

double RngStream::normal() { return normal_(engine_); }

double RngStream::uniform() { return uniform_(engine_); }

}  // namespace sphereqv
