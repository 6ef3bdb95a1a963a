#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "adgm/estimator.hpp"
#include "adgm/mesh.hpp"

namespace adgm {

enum class MarkingKind { doerfler, maximum };

struct MarkingRule {
  MarkingKind kind = MarkingKind::doerfler;
  double parameter = 0.5;  // theta_D or nu, in (0,1)
  void validate() const;
};

/// MARK contract witness: max over unmarked indicators never exceeds E_G(M)
/// (g = identity). Dörfler returns the greedy minimal-cardinality set with
/// E_G(M)^2 >= theta^2 E_G(G)^2, descending order, ties by element id.
std::set<int> mark(const IndicatorField& ind, const MarkingRule& rule);

/// Asserts the marking witness (no unmarked indicator exceeds the marked set
/// total); throws on violation.
void check_mark_contract(const IndicatorField& ind, const std::set<int>& marked);

struct ProblemFunctions {
  ScalarFn f;
  ScalarFn g;          // Dirichlet data (null = homogeneous)
  ScalarFn exact;      // optional
  VectorFn exact_grad; // optional
};

struct StopCriteria {
  long max_dofs = 30000;
  double estimator_tol = 0.0;
};

struct IterationRecord {
  int k = 0;
  long n_elements = 0;
  long n_dofs = 0;
  double estimator_total = 0;
  double est_residual = 0;
  double est_gradjump = 0;
  double est_penalty = 0;
  double err_energy = 0;        // NaN when no exact solution
  double err_l2 = 0;
  double efficiency = 0;        // estimator / energy error
  int solver_iterations = 0;
  long marked = 0;
  double wall_ms = 0;
};

struct RunRecord {
  std::vector<IterationRecord> iterations;
  bool solver_failed = false;
  std::string message;
};

struct AdgmOptions {
  int degree = 1;
  bool uniform = false;        // mark everything each step
  SolverConfig solver;
  bool solver_set = false;     // false: pick method by scheme symmetry
};

struct AdgmResult {
  RunRecord record;
  MeshForest forest;
  std::vector<Field> solutions;  // one per iteration
};

/// SOLVE -> ESTIMATE -> MARK -> REFINE loop (stops on tolerance or DOF budget).
AdgmResult adgm(Mesh initial, const ProblemFunctions& problem, const SchemeParams& params,
                const MarkingRule& rule, const StopCriteria& stop,
                const AdgmOptions& options);

}  // namespace adgm
