#pragma once

#include <vector>

namespace mfs {

// Gauss-Legendre rule on [-1,1]; weights sum to 2. Nodes are Newton-refined
// roots of P_n to machine precision.
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

GaussRule gauss_legendre(int n);

// Legendre polynomial P_n(x) (used by tests to verify the nodes).
double legendre_p(int n, double x);

}  // namespace mfs
