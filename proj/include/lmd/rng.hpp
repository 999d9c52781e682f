#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace lmd {

/// Seeded, splittable random stream.
///
/// Engine: std::mt19937_64 seeded through std::seed_seq from the four 32-bit
/// halves of (seed, stream_id). Uniforms use the top 53 bits of one engine
/// output; normals use the Marsaglia polar method implemented here, so draws do
/// not depend on the standard library's distribution classes.
class RngStream {
public:
    static constexpr std::string_view kAlgorithm =
        "mt19937_64/seed_seq(seed,stream) + 53-bit uniform + Marsaglia polar normal, v1";

    RngStream(std::uint64_t seed, std::uint64_t stream_id);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }

    /// Independent child stream; deterministic in (seed, stream_id, index).
    RngStream substream(std::uint64_t index) const;

    std::uint64_t bits() { return engine_(); }
    /// Uniform on [0, 1).
    double uniform();
    /// Uniform on (0, 1].
    double uniform_open_low() { return 1.0 - uniform(); }
    double normal();

private:
    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::mt19937_64 engine_;
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

/// SplitMix64 finaliser; used to derive child stream ids.
std::uint64_t mix64(std::uint64_t x);

}  // namespace lmd
