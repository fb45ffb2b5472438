#include "riskrl/rng.hpp"

namespace riskrl {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::string_view name)
    : gen_(splitmix64(splitmix64(seed) ^ fnv1a(name))) {}

std::uint64_t RngStream::next_u64() { return gen_(); }

double RngStream::uniform01() {
  return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
}

int RngStream::categorical(std::span<const double> probs) {
  const double u = uniform01();
  double acc = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(probs.size()) - 1;  // guard against rounding in acc
}

int RngStream::sign() { return (gen_() & 1u) ? 1 : -1; }

}  // namespace riskrl
