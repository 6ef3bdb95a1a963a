#pragma once

#include <vector>

namespace adgm {

/// Quadrature on the reference triangle {(u,v): u,v >= 0, u+v <= 1} or the
/// reference edge [0,1]. `exactness` is the highest total polynomial degree
/// integrated exactly.
struct QuadRule {
  std::vector<double> x, y, w;  // y unused for edge rules
  int exactness = 0;
};

/// Conical-product Gauss rule on the reference triangle, exact to `degree`.
const QuadRule& triangle_rule(int degree);

/// Gauss-Legendre rule on [0,1], exact to `degree`.
const QuadRule& edge_rule(int degree);

}  // namespace adgm
