#include "mfschrod/rng.hpp"

#include <random>

#include "mfschrod/errors.hpp"

namespace mfs {

std::vector<RandomSample> sample_uniform(int d, int count, std::uint64_t seed) {
  if (d < 1 || count < 1)
    throw NumericError("sample_uniform: d and count must be >= 1");
  std::mt19937_64 gen(seed);
  std::vector<RandomSample> out(count);
  for (int i = 0; i < count; ++i) {
    out[i].z.resize(d);
    for (int c = 0; c < d; ++c) {
      // top 53 bits -> [0,1); portable, unlike uniform_real_distribution
      const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
      out[i].z[c] = 2.0 * u - 1.0;
    }
  }
  return out;
}

}  // namespace mfs
