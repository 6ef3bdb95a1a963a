#include "adgm/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace adgm {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

SchemeParams Config::scheme_params() const {
  if (scheme == "sipg") return SchemeParams::sipg(degree, c_sigma);
  if (scheme == "nipg") return SchemeParams::nipg(sigma);
  if (scheme == "ldg") {
    if (ldg_variant == "r") return SchemeParams::ldg(sigma, beta);
    if (ldg_variant == "r+1") return SchemeParams::ldg_lifted(beta);
    throw std::runtime_error("ldg_variant must be 'r' or 'r+1'");
  }
  throw std::runtime_error("unknown scheme: " + scheme);
}

MarkingRule Config::marking() const {
  MarkingRule r;
  if (marking_rule == "doerfler")
    r.kind = MarkingKind::doerfler;
  else if (marking_rule == "maximum")
    r.kind = MarkingKind::maximum;
  else
    throw std::runtime_error("unknown marking rule: " + marking_rule);
  r.parameter = marking_parameter;
  r.validate();
  return r;
}

SolverConfig Config::solver_config() const {
  SolverConfig c;
  if (solver_method == "cg")
    c.method = SolverMethod::cg;
  else if (solver_method == "bicgstab")
    c.method = SolverMethod::bicgstab;
  else if (!solver_method.empty())
    throw std::runtime_error("unknown solver method: " + solver_method);
  c.tol = solver_tol;
  c.max_iterations = solver_maxit;
  if (preconditioner == "none")
    c.precond = Preconditioner::none;
  else if (preconditioner == "jacobi-block")
    c.precond = Preconditioner::jacobi_block;
  else
    throw std::runtime_error("unknown preconditioner: " + preconditioner);
  return c;
}

Config parse_config(std::istream& in) {
  Config cfg;
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    if (s.front() == '[' && s.back() == ']') {
      section = trim(s.substr(1, s.size() - 2));
      continue;
    }
    size_t eq = s.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(s.substr(0, eq));
    std::string val = trim(s.substr(eq + 1));
    if (!section.empty()) key = section + "." + key;

    try {
      if (key == "problem") cfg.problem = val;
      else if (key == "scheme") cfg.scheme = val;
      else if (key == "degree") cfg.degree = std::stoi(val);
      else if (key == "c_sigma") cfg.c_sigma = std::stod(val);
      else if (key == "sigma") cfg.sigma = std::stod(val);
      else if (key == "beta") {
        std::istringstream bs(val);
        if (!(bs >> cfg.beta.x >> cfg.beta.y)) throw std::runtime_error("beta needs 2 numbers");
      }
      else if (key == "ldg_variant") cfg.ldg_variant = val;
      else if (key == "marking.rule" || key == "marking_rule") cfg.marking_rule = val;
      else if (key == "marking.parameter" || key == "marking_parameter")
        cfg.marking_parameter = std::stod(val);
      else if (key == "refinement") cfg.refinement = val;
      else if (key == "stop.max_dofs" || key == "max_dofs") cfg.max_dofs = std::stol(val);
      else if (key == "stop.tol" || key == "tol") cfg.tol = std::stod(val);
      else if (key == "solver.method" || key == "solver_method") cfg.solver_method = val;
      else if (key == "solver.tol" || key == "solver_tol") cfg.solver_tol = std::stod(val);
      else if (key == "solver.maxit" || key == "solver_maxit") cfg.solver_maxit = std::stoi(val);
      else if (key == "solver.preconditioner" || key == "preconditioner")
        cfg.preconditioner = val;
      else if (key == "seed") cfg.seed = (unsigned)std::stoul(val);
      else if (key == "output") cfg.output = val;
      else throw std::runtime_error("unknown key '" + key + "'");
    } catch (const std::invalid_argument&) {
      throw std::runtime_error("config line " + std::to_string(lineno) + ": bad value for " + key);
    }
  }
  if (cfg.degree < 1) throw std::runtime_error("degree must be >= 1");
  if (cfg.refinement != "adaptive" && cfg.refinement != "uniform")
    throw std::runtime_error("refinement must be adaptive or uniform");
  cfg.scheme_params();  // cross-field validation
  cfg.marking();
  cfg.solver_config();
  return cfg;
}

Config parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  return parse_config(in);
}

}  // namespace adgm
