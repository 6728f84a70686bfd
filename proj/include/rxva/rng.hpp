#pragma once

#include <array>
#include <cstdint>

namespace rxva {

// Philox4x32-10 counter-based generator. Every draw is a pure function of
// (key, counter), so a path's random numbers do not depend on which worker
// simulates it or in which order.
[[nodiscard]] std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                                      std::array<std::uint32_t, 2> key);

// Independent streams carved out of one root seed.
enum class Stream : std::uint32_t {
    kStock = 1,
    kRegime = 2,
    kDefault = 3,
    kShootingTrain = 4,
    kShootingEval = 5,
    kNetworkInit = 6,
};

/// Sequential view over the counter space of a single (seed, stream, path).
class PathRng {
public:
    PathRng(std::uint64_t seed, Stream stream, std::uint64_t path_index);

    /// Uniform on the open interval (0, 1).
    double uniform();
    double normal();
    /// Inversion: -ln(U)/rate.
    double exponential(double rate);

private:
    void refill();

    std::array<std::uint32_t, 2> key_;
    std::uint32_t stream_;
    std::uint64_t path_;
    std::uint32_t block_ = 0;
    std::array<std::uint32_t, 4> buffer_{};
    int used_ = 4;
    bool has_spare_normal_ = false;
    double spare_normal_ = 0.0;
};

}  // namespace rxva
