// Acceptance battery: twelve end-to-end criteria, one PASS/FAIL line each.
#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "adgm/adapt.hpp"
#include "adgm/analysis.hpp"
#include "adgm/estimator.hpp"
#include "adgm/forms.hpp"
#include "adgm/interp.hpp"
#include "adgm/problems.hpp"
#include "adgm/quadrature.hpp"
#include "adgm/solver.hpp"
#include "adgm/space.hpp"
#include "adgm/verify.hpp"

using namespace adgm;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int id, const std::string& what, bool pass, const std::string& detail) {
  if (!pass) ++failures;
  std::printf("%s  criterion %02d  %s  [%s]\n", pass ? "PASS" : "FAIL", id,
              what.c_str(), detail.c_str());
  std::fflush(stdout);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

RunRecord run_case(const std::string& problem, int degree, bool uniform,
                   const SchemeParams& prm, long max_dofs,
                   MeshForest* forest_out = nullptr) {
  ProblemSpec spec = make_problem(problem);
  AdgmOptions opt;
  opt.degree = degree;
  opt.uniform = uniform;
  AdgmResult res = adgm::adgm(make_domain(spec.domain), spec.functions, prm,
                              {MarkingKind::doerfler, 0.5}, {max_dofs, 0.0}, opt);
  if (forest_out) *forest_out = std::move(res.forest);
  return res.record;
}

// EOC between the last two records: 2 log(e_prev/e_last) / log(N_last/N_prev)
double final_eoc(const std::vector<IterationRecord>& its, bool l2) {
  const IterationRecord &a = its[its.size() - 2], &b = its.back();
  double ea = l2 ? a.err_l2 : a.err_energy, eb = l2 ? b.err_l2 : b.err_energy;
  return 2.0 * std::log(ea / eb) / std::log((double)b.n_dofs / (double)a.n_dofs);
}

// least-squares slope of log(err_energy) vs log(n_dofs) over the last n records
double tail_slope(const std::vector<IterationRecord>& its, size_t n) {
  size_t lo = its.size() > n ? its.size() - n : 0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  size_t cnt = 0;
  for (size_t k = lo; k < its.size(); ++k) {
    double x = std::log((double)its[k].n_dofs), y = std::log(its[k].err_energy);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++cnt;
  }
  return (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
}

bool suite_subset_passes(const std::string& suite, const std::string& needle,
                         std::string& detail) {
  int n = 0, ok = 0;
  for (const CheckResult& c : run_suite(suite)) {
    if (!needle.empty() && c.name.find(needle) == std::string::npos) continue;
    ++n;
    ok += c.pass ? 1 : 0;
    if (!c.pass) detail += " " + c.name;
  }
  std::ostringstream ss;
  ss << ok << "/" << n << " checks" << detail;
  detail = ss.str();
  return n > 0 && ok == n;
}

// ---- criterion 8 helpers: independent dense oracles on small meshes ----

std::vector<std::vector<double>> brute_assemble(const DGSpace& sp, double theta,
                                                double sigma) {
  const Mesh& mesh = sp.mesh();
  const ReferenceBasis& rb = sp.basis();
  int n = sp.n_dofs(), nloc = sp.local_size();
  std::vector<std::vector<double>> A(n, std::vector<double>(n, 0.0));
  const QuadRule& tq = triangle_rule(2 * sp.degree() + 2);
  for (int e = 0; e < mesh.n_elements(); ++e) {
    AffineMap map = affine_map(mesh, e);
    for (int p = 0; p < (int)tq.w.size(); ++p)
      for (int a = 0; a < nloc; ++a)
        for (int c = 0; c < nloc; ++c) {
          double dua, dva, duc, dvc;
          rb.gradient(a, tq.x[p], tq.y[p], dua, dva);
          rb.gradient(c, tq.x[p], tq.y[p], duc, dvc);
          A[sp.dof(e, a)][sp.dof(e, c)] +=
              tq.w[p] * map.det *
              dot(map.push_gradient(dua, dva), map.push_gradient(duc, dvc));
        }
  }
  const QuadRule& eq = edge_rule(2 * sp.degree() + 2);
  for (int f = 0; f < mesh.n_faces(); ++f) {
    const Face& face = mesh.faces[f];
    int ns = face.boundary() ? 1 : 2;
    double mf = ns == 2 ? 0.5 : 1.0;
    double h = mesh.h_face(f);
    Vec2 nrm = mesh.face_normal(f);
    Vec2 p0 = mesh.point(face.v[0]), p1 = mesh.point(face.v[1]);
    for (size_t p = 0; p < eq.w.size(); ++p) {
      Vec2 x = p0 + eq.x[p] * (p1 - p0);
      double W = eq.w[p] * h;
      struct Tr {
        int dof;
        double sgn, val, gn;
      };
      std::vector<Tr> tr;
      for (int s = 0; s < ns; ++s) {
        int e = face.elems[s];
        AffineMap map = affine_map(mesh, e);
        double u, v;
        map.to_reference(x, u, v);
        for (int a = 0; a < nloc; ++a) {
          double du, dv;
          rb.gradient(a, u, v, du, dv);
          tr.push_back({sp.dof(e, a), s == 0 ? 1.0 : -1.0, rb.value(a, u, v),
                        dot(map.push_gradient(du, dv), nrm)});
        }
      }
      for (const Tr& tv : tr)
        for (const Tr& tu : tr)
          A[tv.dof][tu.dof] +=
              W * (-mf * tu.gn * tv.sgn * tv.val -
                   theta * mf * tv.gn * tu.sgn * tu.val +
                   sigma / h * tu.sgn * tu.val * tv.sgn * tv.val);
    }
  }
  return A;
}

bool oracle_assembly(std::string& why) {
  MeshForest forest(make_unit_square());
  forest.refine({0});
  auto sp = std::make_shared<DGSpace>(forest.mesh_ptr(1), 1);
  SchemeParams prm = SchemeParams::sipg(1);
  AssembledSystem sys = assemble_system(*sp, prm, [](Vec2 p) { return 1 + p.x; });
  std::vector<std::vector<double>> ref = brute_assemble(*sp, prm.theta, prm.sigma);
  double worst = 0;
  for (int i = 0; i < sp->n_dofs(); ++i)
    for (int j = 0; j < sp->n_dofs(); ++j)
      worst = std::max(worst, std::abs(sys.A.coeff(i, j) - ref[i][j]));
  why = "assembly dev " + fmt(worst);
  return worst < 1e-10;
}

bool oracle_solver(std::string& why) {
  MeshForest forest(make_unit_square());
  forest.refine({0, 1});
  auto sp = std::make_shared<DGSpace>(forest.mesh_ptr(1), 2);
  AssembledSystem sys =
      assemble_system(*sp, SchemeParams::sipg(2), [](Vec2 p) { return p.y + 1; });
  std::vector<double> ref = dense_solve(sys.A.to_dense(), sys.b);
  SolverConfig cfg;
  cfg.block_size = sp->local_size();
  SolveResult res = solve(sys.A, sys.b, cfg);
  double worst = 0, scale = 0;
  for (double v : ref) scale = std::max(scale, std::abs(v));
  for (size_t i = 0; i < ref.size(); ++i)
    worst = std::max(worst, std::abs(res.x[i] - ref[i]));
  why += ", solver dev " + fmt(worst / scale);
  return res.converged && worst <= 1e-8 * scale;
}

bool oracle_estimator(std::string& why) {
  MeshForest forest(make_unit_square());
  forest.refine({0, 1});  // 8 elements
  auto sp = std::make_shared<DGSpace>(forest.mesh_ptr(1), 1);
  const Mesh& mesh = sp->mesh();
  ScalarFn f = [](Vec2 p) { return 1 + p.x * p.y; };
  SchemeParams prm = SchemeParams::sipg(1);
  AssembledSystem sys = assemble_system(*sp, prm, f);
  SolverConfig cfg;
  cfg.block_size = sp->local_size();
  Field v = make_field(sp);
  v.coeffs = solve(sys.A, sys.b, cfg).x;
  IndicatorField ind = indicators(v, prm, f);
  // independent recomputation
  const QuadRule& tq = triangle_rule(8);
  const QuadRule& eq = edge_rule(8);
  double worst = 0;
  for (int e = 0; e < mesh.n_elements(); ++e) {
    AffineMap map = affine_map(mesh, e);
    double s = 0;
    for (int p = 0; p < (int)tq.w.size(); ++p) {
      double res = f(map.to_physical(tq.x[p], tq.y[p])) +
                   eval_laplacian(v, e, tq.x[p], tq.y[p]);
      s += tq.w[p] * map.det * mesh.area(e) * res * res;
    }
    worst = std::max(worst, std::abs(s - ind.residual2[e]));
  }
  std::vector<double> gj(mesh.n_elements(), 0.0), pen(mesh.n_elements(), 0.0);
  for (int fi = 0; fi < mesh.n_faces(); ++fi) {
    const Face& face = mesh.faces[fi];
    double h = mesh.h_face(fi);
    Vec2 nrm = mesh.face_normal(fi);
    Vec2 p0 = mesh.point(face.v[0]), p1 = mesh.point(face.v[1]);
    double jg2 = 0, jv2 = 0;
    for (size_t p = 0; p < eq.w.size(); ++p) {
      Vec2 x = p0 + eq.x[p] * (p1 - p0);
      double uu, vv;
      affine_map(mesh, face.elems[0]).to_reference(x, uu, vv);
      EvalResult plus = eval(v, face.elems[0], uu, vv);
      double jumpv, jumpg;
      if (face.boundary()) {
        jumpv = plus.value;
        jumpg = 0;
      } else {
        affine_map(mesh, face.elems[1]).to_reference(x, uu, vv);
        EvalResult minus = eval(v, face.elems[1], uu, vv);
        jumpv = plus.value - minus.value;
        jumpg = dot(plus.gradient - minus.gradient, nrm);
      }
      jg2 += eq.w[p] * h * h * jumpg * jumpg;
      jv2 += eq.w[p] * prm.sigma * jumpv * jumpv;  // (sigma/h) * h from measure
    }
    for (int s = 0; s < (face.boundary() ? 1 : 2); ++s) {
      gj[face.elems[s]] += jg2;
      pen[face.elems[s]] += jv2;
    }
  }
  for (int e = 0; e < mesh.n_elements(); ++e) {
    worst = std::max(worst, std::abs(gj[e] - ind.gradjump2[e]));
    worst = std::max(worst, std::abs(pen[e] - ind.penalty2[e]));
  }
  // oscillation closed form on a single unit right triangle, f = x^2, r = 1
  std::vector<Vec2> verts = {{0, 0}, {1, 0}, {0, 1}};
  auto single = std::make_shared<Mesh>(build_initial(verts, {{0, 1, 2}}, {0}));
  DGSpace sp1(single, 1);
  double osc = oscillation(sp1, [](Vec2 p) { return p.x * p.x; }, 0);
  worst = std::max(worst, std::abs(osc * osc - 7.0 / 720));
  why += ", estimator dev " + fmt(worst);
  return worst < 1e-10;
}

bool oracle_marking(std::string& why) {
  std::mt19937 rng(77);
  std::uniform_real_distribution<double> dist(0, 1);
  bool ok = true;
  for (int trial = 0; trial < 30 && ok; ++trial) {
    int n = 5 + (int)(dist(rng) * 8);
    IndicatorField ind;
    ind.total2.resize(n);
    double sum = 0;
    for (double& t : ind.total2) {
      t = dist(rng);
      sum += t;
    }
    double theta = 0.3 + 0.6 * dist(rng);
    std::set<int> m = mark(ind, {MarkingKind::doerfler, theta});
    // independent greedy: descending indicator, ties by id
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      if (ind.total2[a] != ind.total2[b]) return ind.total2[a] > ind.total2[b];
      return a < b;
    });
    std::set<int> greedy;
    double acc = 0;
    for (int e : order) {
      if (acc >= theta * theta * sum) break;
      greedy.insert(e);
      acc += ind.total2[e];
    }
    ok = ok && (m == greedy);  // exact set equality
    // exhaustive minimal cardinality
    size_t best = n + 1;
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
      double s = 0;
      size_t card = 0;
      for (int i = 0; i < n; ++i)
        if (mask & (1u << i)) {
          s += ind.total2[i];
          ++card;
        }
      if (s >= theta * theta * sum) best = std::min(best, card);
    }
    ok = ok && (m.size() == best);
  }
  why += ok ? ", marking sets exact" : ", marking mismatch";
  return ok;
}

bool oracle_averaging(std::string& why) {
  MeshForest forest(make_unit_square());
  forest.refine({0, 1});
  forest.refine({0, 2});
  auto sp = std::make_shared<DGSpace>(forest.mesh_ptr(2), 2);
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> dist(-1, 1);
  Field v = make_field(sp);
  for (double& c : v.coeffs) c = dist(rng);
  Field iv = conforming_interp(v);
  // brute-force oracle: group nodes geometrically, average, zero the boundary
  int nloc = sp->local_size();
  const Mesh& mesh = sp->mesh();
  double worst = 0;
  for (int e = 0; e < mesh.n_elements(); ++e)
    for (int a = 0; a < nloc; ++a) {
      Vec2 p = sp->node_position(e, a);
      bool bdry = std::abs(p.x) < 1e-12 || std::abs(p.x - 1) < 1e-12 ||
                  std::abs(p.y) < 1e-12 || std::abs(p.y - 1) < 1e-12;
      double expect = 0;
      if (!bdry) {
        double sum = 0;
        int cnt = 0;
        for (int e2 = 0; e2 < mesh.n_elements(); ++e2)
          for (int a2 = 0; a2 < nloc; ++a2)
            if (norm(sp->node_position(e2, a2) - p) < 1e-12) {
              sum += v.coeffs[sp->dof(e2, a2)];
              ++cnt;
            }
        expect = sum / cnt;
      }
      worst = std::max(worst, std::abs(iv.coeffs[sp->dof(e, a)] - expect));
    }
  why += ", averaging dev " + fmt(worst);
  return worst < 1e-12;
}

struct Cmd {
  int code;
  std::string out;
};

Cmd sh(const std::string& cmd) {
  fs::path log = fs::temp_directory_path() / "adgm_accept_cmd.log";
  int rc = std::system((cmd + " > " + log.string() + " 2>&1").c_str());
  Cmd res;
  res.code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  res.out = ss.str();
  return res;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// run.csv with the wall-clock column blanked (timing is the one legitimately
// nondeterministic field)
std::string csv_without_wall(const fs::path& p) {
  std::ifstream in(p);
  std::string line, out;
  while (std::getline(in, line)) {
    size_t cut = line.rfind(',');
    out += line.substr(0, cut) + "\n";
  }
  return out;
}

}  // namespace

int main() {
  // 1: convergence orders under uniform refinement, smooth benchmark
  {
    RunRecord r1 = run_case("smooth-square", 1, true, SchemeParams::sipg(1), 20000);
    RunRecord r2 = run_case("smooth-square", 2, true, SchemeParams::sipg(2), 10000);
    double e1 = final_eoc(r1.iterations, false), l1 = final_eoc(r1.iterations, true);
    double e2 = final_eoc(r2.iterations, false);
    bool pass = !r1.solver_failed && !r2.solver_failed && e1 >= 0.9 && e1 <= 1.1 &&
                l1 >= 1.8 && l1 <= 2.2 && e2 >= 1.85 && e2 <= 2.15;
    report(1, "uniform convergence orders", pass,
           "energy r1 " + fmt(e1) + ", L2 r1 " + fmt(l1) + ", energy r2 " + fmt(e2));
  }

  // 2: adaptive estimator decay on the corner benchmark
  {
    RunRecord r = run_case("l-shape-singular", 2, false, SchemeParams::sipg(2), 30000);
    const auto& its = r.iterations;
    bool pass = !r.solver_failed && its.size() >= 11;
    double ratio = its.back().estimator_total / its.front().estimator_total;
    pass = pass && ratio <= 0.05;
    for (size_t k = its.size() - 10; pass && k < its.size(); ++k)
      pass = its[k].estimator_total <= its[k - 1].estimator_total;
    report(2, "adaptive estimator decay", pass,
           "final/initial " + fmt(ratio) + ", last 10 non-increasing");
  }

  // 3 and 4 share runs
  MeshForest sym_forest(make_unit_square());
  {
    RunRecord ad = run_case("l-shape-singular", 1, false, SchemeParams::sipg(1),
                            30000, &sym_forest);
    RunRecord un = run_case("l-shape-singular", 1, true, SchemeParams::sipg(1), 30000);
    double s_ad = tail_slope(ad.iterations, 6), s_un = tail_slope(un.iterations, 6);
    bool pass3 = !ad.solver_failed && !un.solver_failed && s_ad >= -0.6 &&
                 s_ad <= -0.40 && s_un >= -0.42 && s_un <= -0.25;
    report(3, "corner singularity rates, adaptive vs uniform", pass3,
           "adaptive slope " + fmt(s_ad) + ", uniform slope " + fmt(s_un));

    RunRecord sm = run_case("smooth-square", 1, true, SchemeParams::sipg(1), 20000);
    bool pass4 = true;
    double lo = 1e300, hi = 0;
    for (const RunRecord* rr : {&sm, &ad}) {
      const auto& its = rr->iterations;
      double plo = 1e300, phi = 0;
      for (size_t k = its.size() - 4; k < its.size(); ++k) {
        plo = std::min(plo, its[k].efficiency);
        phi = std::max(phi, its[k].efficiency);
      }
      pass4 = pass4 && plo >= 0.5 && phi <= 50.0 && phi / plo < 2.0;
      lo = std::min(lo, plo);
      hi = std::max(hi, phi);
    }
    report(4, "estimator efficiency stable", pass4,
           "efficiency range [" + fmt(lo) + ", " + fmt(hi) + "], drift < 2x");
  }

  // 5: all schemes comparable at the same uniform resolution
  {
    std::vector<std::pair<std::string, SchemeParams>> schemes = {
        {"sipg", SchemeParams::sipg(1)},
        {"nipg", SchemeParams::nipg()},
        {"ldg", SchemeParams::ldg()},
        {"ldg-lifted", SchemeParams::ldg_lifted()}};
    double lo = 1e300, hi = 0;
    bool pass = true;
    long dofs = 0;
    for (auto& [name, prm] : schemes) {
      RunRecord r = run_case("smooth-square", 1, true, prm, 10000);
      pass = pass && !r.solver_failed;
      double l2 = r.iterations.back().err_l2;
      dofs = r.iterations.back().n_dofs;
      lo = std::min(lo, l2);
      hi = std::max(hi, l2);
    }
    pass = pass && hi / lo <= 3.0;
    report(5, "scheme agreement at matched resolution", pass,
           "L2 spread " + fmt(hi / lo) + "x at " + std::to_string(dofs) + " dofs");
  }

  // 6: coercivity sampling with frozen constants
  {
    std::string d;
    bool pass = suite_subset_passes("forms", "coercivity", d);
    report(6, "coercivity constants locked", pass, d);
  }

  // 7: symmetry of the symmetric scheme on every mesh of an adaptive run
  {
    double worst = 0;
    int levels = std::min(sym_forest.size(), 12);
    for (int k = 0; k < levels; ++k) {
      DGSpace sp(sym_forest.mesh_ptr(k), 1);
      AssembledSystem sys =
          assemble_system(sp, SchemeParams::sipg(1), [](Vec2) { return 1.0; });
      worst = std::max(worst, sys.A.symmetry_defect() / sys.A.max_abs());
    }
    report(7, "symmetric scheme stays symmetric per level", worst <= 1e-12,
           "max relative defect " + fmt(worst) + " over " + std::to_string(levels) +
               " meshes");
  }

  // 8: module outputs reproduced by independent dense oracles on small meshes
  {
    std::string why;
    bool pass = oracle_assembly(why);
    pass = oracle_solver(why) && pass;
    pass = oracle_estimator(why) && pass;
    pass = oracle_marking(why) && pass;
    pass = oracle_averaging(why) && pass;
    report(8, "dense oracle equivalence", pass, why);
  }

  // 9: quasi-interpolation and averaging property suite
  {
    std::string d;
    bool pass = suite_subset_passes("interp", "", d);
    report(9, "interpolation property suite", pass, d);
  }

  // 10: mesh refinement contract and classification monotonicity
  {
    std::string d1;
    bool pass = suite_subset_passes("mesh", "", d1);
    std::string d2;
    pass = suite_subset_passes("analysis", "", d2) && pass;
    report(10, "mesh and sequence classification suite", pass, d1 + "; " + d2);
  }

  // 11: lifting identities and stability locks
  {
    std::string d;
    bool pass = suite_subset_passes("forms", "lifting", d);
    report(11, "lifting identities and stability", pass, d);
  }

  // 12: byte determinism across reruns and thread settings
  {
    const char* cli = ADGM_CLI_PATH;
    bool pass = true;
    Cmd v1 = sh(std::string("ADGM_THREADS=1 ") + cli + " verify all");
    Cmd v2 = sh(std::string("ADGM_THREADS=4 ") + cli + " verify all");
    pass = pass && v1.code == 0 && v2.code == 0 && v1.out == v2.out;

    fs::path dir = fs::temp_directory_path() / "adgm_accept_det";
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::string csv[2], meshes[2];
    for (int i = 0; i < 2; ++i) {
      fs::path out = dir / ("out" + std::to_string(i));
      fs::path cfg = dir / "case.cfg";
      std::ofstream c(cfg);
      c << "problem = l-shape-singular\nscheme = sipg\ndegree = 1\n"
        << "marking_rule = doerfler\nmarking_parameter = 0.5\n"
        << "max_dofs = 2500\noutput = " << out.string() << "\n";
      c.close();
      Cmd r = sh(std::string(i == 0 ? "ADGM_THREADS=1 " : "ADGM_THREADS=4 ") + cli +
                 " run " + cfg.string());
      pass = pass && r.code == 0;
      csv[i] = csv_without_wall(out / "run.csv");
      for (const auto& entry : fs::directory_iterator(out / "meshes"))
        meshes[i] += slurp(entry.path());
    }
    pass = pass && csv[0] == csv[1] && !csv[0].empty();
    pass = pass && meshes[0] == meshes[1] && !meshes[0].empty();
    report(12, "byte-identical reruns (timing column excluded)", pass,
           "verify + run outputs identical across ADGM_THREADS 1 and 4");
  }

  std::printf("%s (%d of 12 criteria)\n", failures == 0 ? "ACCEPTED" : "REJECTED",
              12 - failures);
  return failures == 0 ? 0 : 1;
}
