#include "adgm/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <vector>

#include "adgm/adapt.hpp"
#include "adgm/analysis.hpp"
#include "adgm/problems.hpp"
#include "adgm/verify.hpp"

namespace adgm {

namespace {

namespace fs = std::filesystem;

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

/// Experimental order of convergence between consecutive levels, with respect
/// to DOF counts: eoc = 2 log(e_prev / e) / log(N / N_prev).
double eoc(double e_prev, double e, long n_prev, long n) {
  if (!(e_prev > 0) || !(e > 0) || n <= n_prev) return std::nan("");
  return 2.0 * std::log(e_prev / e) / std::log((double)n / (double)n_prev);
}

void write_run_csv(std::ostream& out, const RunRecord& rec, char sep) {
  const char* cols[] = {"k", "n_elem", "n_dofs", "estimator_total", "est_residual",
                        "est_gradjump", "est_penalty", "err_energy", "err_l2",
                        "efficiency", "solver_iters", "marked", "wall_ms"};
  for (size_t i = 0; i < std::size(cols); ++i) out << (i ? std::string(1, sep) : "") << cols[i];
  out << "\n";
  for (const IterationRecord& it : rec.iterations) {
    out << it.k << sep << it.n_elements << sep << it.n_dofs << sep
        << num(it.estimator_total) << sep << num(it.est_residual) << sep
        << num(it.est_gradjump) << sep << num(it.est_penalty) << sep
        << num(it.err_energy) << sep << num(it.err_l2) << sep << num(it.efficiency) << sep
        << it.solver_iterations << sep << it.marked << sep << num(it.wall_ms) << "\n";
  }
}

void write_summary(std::ostream& out, const RunRecord& rec, const Config& cfg) {
  out << "problem:   " << cfg.problem << "\n";
  out << "scheme:    " << cfg.scheme << " (degree " << cfg.degree << ")\n";
  out << "marking:   " << cfg.marking_rule << " " << num(cfg.marking_parameter) << " ("
      << cfg.refinement << ")\n";
  out << "levels:    " << rec.iterations.size() << "\n\n";
  out << "   k      n_dofs   estimator  eoc(est)  err_energy  eoc(energy)      err_l2  "
         "eoc(l2)\n";
  const IterationRecord* prev = nullptr;
  for (const IterationRecord& it : rec.iterations) {
    double eest = std::nan(""), een = std::nan(""), el2 = std::nan("");
    if (prev) {
      eest = eoc(prev->estimator_total, it.estimator_total, prev->n_dofs, it.n_dofs);
      een = eoc(prev->err_energy, it.err_energy, prev->n_dofs, it.n_dofs);
      el2 = eoc(prev->err_l2, it.err_l2, prev->n_dofs, it.n_dofs);
    }
    char line[256];
    std::snprintf(line, sizeof line, "%4d  %10ld  %10.4e  %8.3f  %10.4e  %11.3f  %10.4e  %7.3f\n",
                  it.k, it.n_dofs, it.estimator_total, eest, it.err_energy, een, it.err_l2,
                  el2);
    out << line;
    prev = &it;
  }
  if (rec.solver_failed) out << "\nsolver failure: " << rec.message << "\n";
}

}  // namespace

int run_command(const Config& cfg, bool gnuplot, std::ostream& log) {
  ProblemSpec prob = make_problem(cfg.problem);
  if (prob.has_exact) smoke_check(prob, cfg.seed ? cfg.seed : 1234);

  StopCriteria stop;
  stop.max_dofs = cfg.max_dofs;
  stop.estimator_tol = cfg.tol;
  AdgmOptions opt;
  opt.degree = cfg.degree;
  opt.uniform = cfg.refinement == "uniform";
  opt.solver = cfg.solver_config();
  opt.solver_set = !cfg.solver_method.empty();

  AdgmResult res = adgm(make_domain(prob.domain), prob.functions, cfg.scheme_params(),
                        cfg.marking(), stop, opt);

  fs::path out_dir(cfg.output);
  fs::create_directories(out_dir / "meshes");
  {
    std::ofstream csv(out_dir / "run.csv");
    write_run_csv(csv, res.record, ',');
  }
  {
    std::ofstream sum(out_dir / "summary.txt");
    write_summary(sum, res.record, cfg);
  }
  if (gnuplot) {
    std::ofstream dat(out_dir / "run.dat");
    write_run_csv(dat, res.record, ' ');
  }
  for (int k = 0; k < res.forest.size(); ++k) {
    char name[64];
    std::snprintf(name, sizeof name, "mesh_%03d.dgmesh", k);
    write_mesh_file((out_dir / "meshes" / name).string(), res.forest.mesh(k));
  }

  for (const IterationRecord& it : res.record.iterations)
    log << "k=" << it.k << " n_dofs=" << it.n_dofs
        << " estimator=" << num(it.estimator_total) << "\n";
  if (res.record.solver_failed) {
    log << "solver failure: " << res.record.message << "\n";
    return exit_solver;
  }
  return exit_ok;
}

int verify_command(const std::string& suite, std::ostream& out) {
  std::vector<CheckResult> results = run_suite(suite);
  bool all = true;
  for (const CheckResult& r : results) {
    out << (r.pass ? "PASS" : "FAIL") << "  " << r.name;
    if (!r.detail.empty()) out << "  [" << r.detail << "]";
    out << "\n";
    all = all && r.pass;
  }
  out << (all ? "OK" : "FAILED") << " (" << results.size() << " checks)\n";
  return all ? exit_ok : exit_verification;
}

int classify_command(const std::string& dir, std::ostream& out, std::ostream& err) {
  fs::path base(dir);
  fs::path mesh_dir = fs::exists(base / "meshes") ? base / "meshes" : base;
  std::vector<fs::path> files;
  if (fs::exists(mesh_dir))
    for (const auto& entry : fs::directory_iterator(mesh_dir))
      if (entry.path().extension() == ".dgmesh") files.push_back(entry.path());
  if (files.empty()) {
    err << "no .dgmesh files under " << dir << "\n";
    return exit_config;
  }
  std::sort(files.begin(), files.end());
  std::vector<Mesh> meshes;
  for (const fs::path& p : files) meshes.push_back(read_mesh_file(p.string(), false));
  MeshForest forest = MeshForest::from_meshes(std::move(meshes));
  SequenceClassification cls = classify(forest);
  {
    std::ofstream csv(base / "classification.csv");
    write_classification_csv(csv, forest, cls);
  }
  write_classification_csv(out, forest, cls);
  return exit_ok;
}

int mesh_gen_command(const std::string& name, const std::string& path, std::ostream& err) {
  try {
    write_mesh_file(path, make_domain(name));
  } catch (const std::exception& e) {
    err << e.what() << "\n";
    return exit_config;
  }
  return exit_ok;
}

}  // namespace adgm
