/// @file rng.h
/// @brief Portable deterministic random streams.
///
/// std::mt19937 ordering is portable but the distributions are not; both the
/// generator and the draws here are pinned so logs and reports reproduce
/// bit-for-bit across toolchains. Streams fork by name from the construction
/// seed, so fork order never changes a stream's output.
#pragma once

#include <cstdint>
#include <string_view>

namespace geoflow {

class Rng {
  public:
    explicit Rng(std::uint64_t seed);

    /// splitmix64 step.
    std::uint64_t next_u64();

    /// Uniform in [0,1) with 53 random bits.
    double uniform();
    /// Uniform in [a,b).
    double uniform(double a, double b);
    /// Standard normal via Box-Muller (second value cached).
    double normal();
    /// Uniform integer in [0,n), n > 0.
    int uniform_int(int n);

    /// Independent stream derived from this stream's seed and a label.
    Rng fork(std::string_view name) const;

    std::uint64_t seed() const { return seed_; }

  private:
    std::uint64_t seed_;
    std::uint64_t state_;
    bool have_cached_ = false;
    double cached_ = 0.0;
};

}  // namespace geoflow
