#pragma once

#include <iosfwd>
#include <string>

#include "adgm/adapt.hpp"
#include "adgm/problems.hpp"

namespace adgm {

/// Full run configuration (flat key = value text format with [sections];
/// section names prefix the key with "section.").
struct Config {
  std::string problem = "smooth-square";
  std::string scheme = "sipg";  // sipg | nipg | ldg
  int degree = 1;
  double c_sigma = 10.0;
  double sigma = 1.0;          // NIPG / LDG penalty
  Vec2 beta{0.5, 0.5};
  std::string ldg_variant = "r";  // "r" (sigma>0) or "r+1" (sigma=0)
  std::string marking_rule = "doerfler";
  double marking_parameter = 0.5;
  std::string refinement = "adaptive";  // adaptive | uniform
  long max_dofs = 30000;
  double tol = 0.0;
  std::string solver_method;   // empty: pick by scheme
  double solver_tol = 1e-10;
  int solver_maxit = 0;
  std::string preconditioner = "jacobi-block";
  unsigned seed = 0;
  std::string output = "out";

  SchemeParams scheme_params() const;
  MarkingRule marking() const;
  SolverConfig solver_config() const;
};

Config parse_config(std::istream& in);
Config parse_config_file(const std::string& path);

}  // namespace adgm
