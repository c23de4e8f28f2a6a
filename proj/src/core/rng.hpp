#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace chunkseam {

// Every random quantity in the toolkit flows through this generator so that
// runs are bit-reproducible across platforms. The standard library's
// distributions are implementation-defined, so uniform/normal/shuffle are
// implemented here (xoshiro256++ state, splitmix64 seeding, Box-Muller
// normals without a cached spare).
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  // Independent named substream: hashes (seed, label, a, b) into a fresh
  // state. Streams with distinct labels/indices never overlap in practice.
  static Rng derive(std::uint64_t root, std::string_view label,
                    std::uint64_t a = 0, std::uint64_t b = 0);
  static std::uint64_t derive_seed(std::uint64_t root, std::string_view label,
                                   std::uint64_t a = 0, std::uint64_t b = 0);

  std::uint64_t next_u64();
  // Uniform on [0, 1) with 53 random bits.
  double next_double();
  // Uniform integer in [0, n).
  std::uint64_t next_below(std::uint64_t n);
  double next_normal();
  std::vector<double> normal_vector(std::size_t n);
  bool next_bernoulli(double p);

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(next_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::array<std::uint64_t, 4> state_{};
};

std::uint64_t splitmix64(std::uint64_t& state);

// FNV-1a over bytes; used for config hashes and stream derivation.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t basis = 0xcbf29ce484222325ULL);

// Seed provenance recorded in traces and noise vectors: the run's root seed
// plus the index of the episode (or probe family) the stream was derived for.
struct SeedRecord {
  std::uint64_t root = 0;
  std::uint64_t index = 0;
};

inline bool operator==(const SeedRecord& a, const SeedRecord& b) {
  return a.root == b.root && a.index == b.index;
}

}  // namespace chunkseam
