#pragma once
#include <cmath>
#include <cstdint>
#include <random>

namespace pmsim {

// splitmix64 finalizer: whitens seed material so derived streams decorrelate.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Derive a child seed from (master, index...) so changing the run count never
// disturbs the streams of earlier runs.
inline std::uint64_t derive_seed(std::uint64_t master) { return splitmix64(master); }

template <class... Rest>
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index, Rest... rest) {
  return derive_seed(splitmix64(master ^ splitmix64(index + 0x517cc1b727220a95ull)), rest...);
}

// Deterministic generator: hand-rolled variate transforms so that results are
// reproducible bit-for-bit for a given seed within one build.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  // uniform in [0, 1)
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  // uniform integer in [0, n)
  std::size_t uniform_index(std::size_t n) {
    double u = uniform();
    auto k = static_cast<std::size_t>(u * static_cast<double>(n));
    return k < n ? k : n - 1;
  }

  // standard normal via Box-Muller (cached spare)
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  std::uint64_t raw() { return eng_(); }

 private:
  std::mt19937_64 eng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace pmsim
