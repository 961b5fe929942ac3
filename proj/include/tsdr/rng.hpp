#pragma once

#include <cstdint>

#include <boost/random/mersenne_twister.hpp>

namespace tsdr {

// Identifier recorded in run provenance. Boost distributions are used instead
// of <random> ones because their output is specified independently of the
// standard library implementation.
inline constexpr const char* kRngAlgorithm = "boost::random::mt19937_64 (splitmix64-derived substreams)";

// SplitMix64 finalizer over (seed, stream); used to derive independent seeds.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static Rng substream(std::uint64_t seed, std::uint64_t stream) { return Rng(derive_seed(seed, stream)); }

  double uniform();
  double normal();
  double exponential();
  // Shape/scale parameterization.
  double gamma(double shape, double scale);
  double beta(double a, double b);

 private:
  boost::random::mt19937_64 engine_;
};

}  // namespace tsdr
