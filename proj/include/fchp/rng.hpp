#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace fchp {

/// Seeded generator with portable derived distributions.
///
/// std::mt19937_64's raw sequence is fixed by the standard; the standard
/// distributions are not, so everything downstream is built from raw draws.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform in [0, n); n must be > 0.
  std::uint64_t below(std::uint64_t n);

  /// Standard normal via the polar method.
  double normal();

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Independent stream seed for `stream` under `master` (splitmix64 mixing).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

}  // namespace fchp
