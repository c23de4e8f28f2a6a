#include "core/rng.hpp"

#include <cmath>

#include "core/error.hpp"

namespace chunkseam {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t basis) {
  std::uint64_t h = basis;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace

Rng::Rng(std::uint64_t seed) {
  std::uint64_t s = seed;
  for (auto& word : state_) {
    word = splitmix64(s);
  }
}

std::uint64_t Rng::derive_seed(std::uint64_t root, std::string_view label,
                               std::uint64_t a, std::uint64_t b) {
  std::uint64_t h = fnv1a(label);
  std::uint64_t mix = root;
  mix ^= h + 0x9e3779b97f4a7c15ULL + (mix << 6) + (mix >> 2);
  mix ^= splitmix64(a) + (mix << 6) + (mix >> 2);
  mix ^= splitmix64(b) + (mix << 6) + (mix >> 2);
  return mix;
}

Rng Rng::derive(std::uint64_t root, std::string_view label, std::uint64_t a,
                std::uint64_t b) {
  return Rng(derive_seed(root, label, a, b));
}

std::uint64_t Rng::next_u64() {
  std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
  std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double Rng::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::next_below(std::uint64_t n) {
  if (n == 0) {
    throw_error(ErrorCode::invalid_argument, "next_below: n must be positive");
  }
  // Rejection sampling keeps the draw exactly uniform.
  std::uint64_t threshold = (0ULL - n) % n;
  for (;;) {
    std::uint64_t r = next_u64();
    if (r >= threshold) {
      return r % n;
    }
  }
}

double Rng::next_normal() {
  // Box-Muller, cosine branch only; one normal costs two uniforms but the
  // stream stays position-independent of caller history.
  double u1 = 1.0 - next_double();  // (0, 1]
  double u2 = next_double();
  double radius = std::sqrt(-2.0 * std::log(u1));
  return radius * std::cos(2.0 * M_PI * u2);
}

std::vector<double> Rng::normal_vector(std::size_t n) {
  std::vector<double> out(n);
  for (auto& x : out) {
    x = next_normal();
  }
  return out;
}

bool Rng::next_bernoulli(double p) {
  return next_double() < p;
}

}  // namespace chunkseam
