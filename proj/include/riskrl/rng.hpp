#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace riskrl {

/// Seeded mt19937_64 substream identified by (seed, name). Distinct names
/// derive decorrelated seeds, so perturbed and unperturbed simulations, or
/// parallel replications, never share randomness. Draws avoid the standard
/// library distributions so the byte stream is identical on every platform.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::string_view name);

  std::uint64_t next_u64();

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01();

  /// Index sampled from a probability vector by inverse CDF.
  int categorical(std::span<const double> probs);

  /// Fair +-1.
  int sign();

 private:
  std::mt19937_64 gen_;
};

}  // namespace riskrl
