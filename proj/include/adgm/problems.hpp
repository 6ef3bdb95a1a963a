#pragma once

#include <string>

#include "adgm/adapt.hpp"

namespace adgm {

/// A named benchmark: domain, forcing, Dirichlet data, optional exact solution
/// with gradient and Laplacian.
struct ProblemSpec {
  std::string name;
  std::string domain;  // "unit-square", "l-shape", "file:<path>"
  ProblemFunctions functions;
  ScalarFn exact_laplacian;  // for the -Lap u = f smoke check
  bool has_exact = false;
};

/// Built-ins: "smooth-square" (u = sin(pi x) sin(pi y)) and
/// "l-shape-singular" (u = rho^{2/3} sin(2 phi / 3), f = 0, g = trace of u).
ProblemSpec make_problem(const std::string& name);

/// Verifies -Lap u = f at `samples` seeded random points inside the domain.
void smoke_check(const ProblemSpec& p, unsigned seed = 1234, int samples = 50,
                 double tol = 1e-6);

}  // namespace adgm
