#pragma once

#include <cstdint>
#include <vector>

#include "mfschrod/grid.hpp"

namespace mfs {

// count i.i.d. samples uniform on [-1,1]^d, in sample-major draw order.
//
// Generator: std::mt19937_64 seeded directly with `seed`; each coordinate is
// u = (x >> 11) * 2^-53 in [0,1) mapped to 2u - 1. mt19937_64 output is fully
// pinned down by the C++ standard and no library distribution is involved, so
// streams are bit-identical across platforms. Distinct seeds give
// independent streams.
std::vector<RandomSample> sample_uniform(int d, int count, std::uint64_t seed);

}  // namespace mfs
