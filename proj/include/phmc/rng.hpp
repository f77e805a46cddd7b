#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>

namespace phmc {

/// SplitMix64 finalizer. Used to derive independent stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of the stream at `path` below `master`:
///   s_0 = splitmix64(master), s_{i+1} = splitmix64(s_i ^ path[i]).
/// Replica r of experiment T-index t uses path {t, r}.
constexpr std::uint64_t derive_seed(std::uint64_t master,
                                    std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t s = splitmix64(master);
  for (std::uint64_t p : path) s = splitmix64(s ^ p);
  return s;
}

/// A single-owner random stream: mt19937_64 plus a cached standard normal sampler.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed), seed_(seed) {}

  static RngStream derive(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
    return RngStream(derive_seed(master, path));
  }

  std::uint64_t seed() const noexcept { return seed_; }

  /// Uniform on the open interval (0, 1).
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal() { return normal_(engine_); }

  void fill_normal(std::span<double> out) {
    for (double& x : out) x = normal_(engine_);
  }

  /// Geometric on {1, 2, ...} with success probability p (mean 1/p), by inversion of
  /// exactly one uniform draw.
  std::uint64_t geometric(double p);

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uint64_t seed_;
};

}  // namespace phmc
