#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace levycouple {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace detail

/// xoshiro256++ stream with explicit substream derivation. Ensemble code
/// derives one stream per (base seed, path index, purpose) triple, so results
/// do not depend on scheduling or thread count.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : state_) word = detail::splitmix64(sm);
  }

  static RngStream for_path(std::uint64_t base_seed, std::uint64_t path_index,
                            std::uint64_t purpose) {
    std::uint64_t sm = base_seed;
    std::uint64_t a = detail::splitmix64(sm);
    sm = a ^ (0x9E3779B97F4A7C15ULL * (path_index + 1));
    std::uint64_t b = detail::splitmix64(sm);
    sm = b ^ (0xBF58476D1CE4E5B9ULL * (purpose + 1));
    RngStream out(0);
    out.state_[0] = detail::splitmix64(sm);
    out.state_[1] = detail::splitmix64(sm);
    out.state_[2] = detail::splitmix64(sm);
    out.state_[3] = detail::splitmix64(sm);
    return out;
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = detail::rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = detail::rotl(state_[3], 45);
    return result;
  }

  /// Uniform on [0, 1) with 53 random bits.
  double u01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1]; safe as input to log and negative powers.
  double u01_open() { return 1.0 - u01(); }

  double exponential(double rate) {
    if (!(rate > 0.0)) throw std::domain_error("exponential: rate must be positive");
    return -std::log(u01_open()) / rate;
  }

  int sign() { return (next_u64() & 1ULL) ? 1 : -1; }

  /// Standard normal via Box-Muller; no caching so the draw count per call
  /// is fixed (two uniforms).
  double gaussian() {
    const double r = std::sqrt(-2.0 * std::log(u01_open()));
    return r * std::cos(2.0 * M_PI * u01());
  }

  /// Uniform direction on S^{d-1}, written into out[0..d).
  void unit_vector(int d, double* out) {
    if (d == 1) {
      out[0] = static_cast<double>(sign());
      return;
    }
    while (true) {
      double ss = 0.0;
      for (int i = 0; i < d; ++i) {
        out[i] = gaussian();
        ss += out[i] * out[i];
      }
      if (ss > 1e-300) {
        const double inv = 1.0 / std::sqrt(ss);
        for (int i = 0; i < d; ++i) out[i] *= inv;
        return;
      }
    }
  }

 private:
  std::uint64_t state_[4]{};
};

}  // namespace levycouple
