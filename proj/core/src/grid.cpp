#include "mfschrod/grid.hpp"

#include <sstream>

#include "mfschrod/errors.hpp"

namespace mfs {

SpatialGrid1D make_grid(double a, double b, int n) {
  if (!(b > a)) {
    std::ostringstream os;
    os << "grid: b must exceed a (got a=" << a << ", b=" << b << ")";
    throw NumericError(os.str());
  }
  if (n <= 0 || n % 2 != 0) {
    std::ostringstream os;
    os << "grid: n must be even and positive (got n=" << n << ")";
    throw NumericError(os.str());
  }
  SpatialGrid1D g;
  g.a = a;
  g.b = b;
  g.n = n;
  g.h = (b - a) / n;
  return g;
}

}  // namespace mfs
