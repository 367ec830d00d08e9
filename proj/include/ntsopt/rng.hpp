#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace ntsopt {

// mt19937_64 with hand-rolled variate transforms. std::uniform_real_distribution
// and friends are implementation-defined, which would break the "same seed,
// byte-identical output" guarantee across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double exponential() { return -std::log1p(-uniform()); }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1, r2;
    double v1, v2;
    do {  // Marsaglia polar method
      v1 = 2.0 * uniform() - 1.0;
      v2 = 2.0 * uniform() - 1.0;
      r2 = v1 * v1 + v2 * v2;
    } while (r2 >= 1.0 || r2 == 0.0);
    u1 = std::sqrt(-2.0 * std::log(r2) / r2);
    spare_ = v2 * u1;
    have_spare_ = true;
    return v1 * u1;
  }

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace ntsopt
