#include "adgm/adapt.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace adgm {

void MarkingRule::validate() const {
  if (!(parameter > 0 && parameter < 1))
    throw std::runtime_error("marking parameter must be in (0,1)");
}

std::set<int> mark(const IndicatorField& ind, const MarkingRule& rule) {
  rule.validate();
  int n = (int)ind.total2.size();
  std::set<int> marked;
  double total2 = 0, max2 = 0;
  for (double t : ind.total2) {
    total2 += t;
    max2 = std::max(max2, t);
  }
  if (total2 == 0) return marked;  // all indicators zero -> empty set

  if (rule.kind == MarkingKind::maximum) {
    double thresh = rule.parameter * std::sqrt(max2);
    for (int e = 0; e < n; ++e)
      if (std::sqrt(ind.total2[e]) >= thresh && ind.total2[e] > 0) marked.insert(e);
    return marked;
  }

  // Dörfler: greedy descending, ties by ascending element id
  std::vector<int> order(n);
  for (int e = 0; e < n; ++e) order[e] = e;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (ind.total2[a] != ind.total2[b]) return ind.total2[a] > ind.total2[b];
    return a < b;
  });
  double target = rule.parameter * rule.parameter * total2;
  double acc = 0;
  for (int e : order) {
    if (acc >= target) break;
    marked.insert(e);
    acc += ind.total2[e];
  }
  return marked;
}

void check_mark_contract(const IndicatorField& ind, const std::set<int>& marked) {
  double marked2 = 0, max_unmarked2 = 0;
  for (size_t e = 0; e < ind.total2.size(); ++e) {
    if (marked.count((int)e))
      marked2 += ind.total2[e];
    else
      max_unmarked2 = std::max(max_unmarked2, ind.total2[e]);
  }
  if (max_unmarked2 > marked2 * (1 + 1e-12))
    throw std::runtime_error("marking contract violated: unmarked indicator exceeds E_G(M)");
}

AdgmResult adgm(Mesh initial, const ProblemFunctions& problem, const SchemeParams& params,
                const MarkingRule& rule, const StopCriteria& stop,
                const AdgmOptions& options) {
  params.validate();
  if (!options.uniform) rule.validate();
  AdgmResult result{RunRecord{}, MeshForest(std::move(initial)), {}};
  MeshForest& forest = result.forest;
  double sigma_bar = params.sigma_bar();

  for (int k = 0;; ++k) {
    auto t0 = std::chrono::steady_clock::now();
    auto mesh = forest.mesh_ptr(forest.size() - 1);
    auto space = std::make_shared<DGSpace>(mesh, options.degree);

    // SOLVE
    AssembledSystem sys = assemble_system(*space, params, problem.f, problem.g);
    SolverConfig scfg = options.solver;
    if (!options.solver_set)
      scfg.method = params.scheme == Scheme::sipg ? SolverMethod::cg : SolverMethod::bicgstab;
    scfg.block_size = space->local_size();
    SolveResult sol = solve(sys.A, sys.b, scfg);
    if (!sol.converged) {
      result.record.solver_failed = true;
      result.record.message = sol.message;
      return result;
    }
    Field u{space, std::move(sol.x)};

    // ESTIMATE
    IndicatorField ind = indicators(u, params, problem.f, problem.g);
    IterationRecord rec;
    rec.k = k;
    rec.n_elements = mesh->n_elements();
    rec.n_dofs = space->n_dofs();
    rec.estimator_total = total(ind);
    double r2 = 0, gj2 = 0, pj2 = 0;
    for (size_t e = 0; e < ind.total2.size(); ++e) {
      r2 += ind.residual2[e];
      gj2 += ind.gradjump2[e];
      pj2 += ind.penalty2[e];
    }
    rec.est_residual = std::sqrt(r2);
    rec.est_gradjump = std::sqrt(gj2);
    rec.est_penalty = std::sqrt(pj2);
    if (problem.exact && problem.exact_grad) {
      ErrorNorms err = errors_vs_exact(u, problem.exact, problem.exact_grad, sigma_bar);
      rec.err_energy = err.energy;
      rec.err_l2 = err.l2;
      rec.efficiency = err.energy > 0 ? rec.estimator_total / err.energy
                                      : std::numeric_limits<double>::quiet_NaN();
    } else {
      rec.err_energy = rec.err_l2 = rec.efficiency =
          std::numeric_limits<double>::quiet_NaN();
    }
    rec.solver_iterations = sol.iterations;
    result.solutions.push_back(std::move(u));

    bool stop_now = rec.n_dofs >= stop.max_dofs ||
                    rec.estimator_total <= stop.estimator_tol;

    // MARK
    std::set<int> marked;
    if (!stop_now) {
      if (options.uniform) {
        for (int e = 0; e < mesh->n_elements(); ++e) marked.insert(e);
      } else {
        marked = mark(ind, rule);
        check_mark_contract(ind, marked);
      }
    }
    rec.marked = (long)marked.size();
    auto t1 = std::chrono::steady_clock::now();
    rec.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    result.record.iterations.push_back(rec);
    if (stop_now || marked.empty()) break;

    // REFINE; the no-survivor contract is asserted inside MeshForest::refine
    forest.refine(marked);
    if (options.uniform) {
      // A uniform level halves h: bisect every child once more so each
      // triangle of the previous level is split into four.
      std::set<int> all;
      for (int e = 0; e < forest.last().n_elements(); ++e) all.insert(e);
      forest.refine(all);
    }
  }
  return result;
}

}  // namespace adgm
