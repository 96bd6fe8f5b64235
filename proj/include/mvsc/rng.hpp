#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace mvsc {

// All randomness in the library flows from one master seed through named
// sub-streams ("landmarks", "kmeans-restart-3", ...) so components can be
// re-run and tested independently without sharing generator state.

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::string_view stream) {
  // FNV-1a over the stream name, then mixed with the master seed.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : stream) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return splitmix64(h ^ splitmix64(master));
}

inline std::mt19937_64 substream(std::uint64_t master, std::string_view stream) {
  return std::mt19937_64(derive_seed(master, stream));
}

// Uniform integer in [0, n) from the generator's raw 64-bit output.
// Hand-rolled so results do not depend on the standard library's
// distribution internals.
inline std::uint64_t uniform_index(std::mt19937_64& gen, std::uint64_t n) {
  const std::uint64_t limit = std::mt19937_64::max() - std::mt19937_64::max() % n;
  std::uint64_t v;
  do {
    v = gen();
  } while (v >= limit);
  return v % n;
}

inline double uniform_unit(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

// Marsaglia polar method; avoids std::normal_distribution so streams are
// reproducible across standard libraries.
class NormalSampler {
 public:
  double operator()(std::mt19937_64& gen) {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform_unit(gen) - 1.0;
      v = 2.0 * uniform_unit(gen) - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
  }

 private:
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace mvsc
