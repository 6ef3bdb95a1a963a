#pragma once

#include <array>
#include <functional>
#include <vector>

#include "adgm/solver.hpp"
#include "adgm/space.hpp"

namespace adgm {

using ScalarFn = std::function<double(Vec2)>;
using VectorFn = std::function<Vec2(Vec2)>;

enum class Scheme { sipg, nipg, ldg };

/// Parameters of the unified DG bilinear form.
struct SchemeParams {
  Scheme scheme = Scheme::sipg;
  double theta = 1.0;        // {+1, -1}
  Vec2 beta{0, 0};
  double gamma = 0.0;        // {0, 1}
  double sigma = 0.0;        // >= 0
  int lifting_offset = 0;    // ell = r + lifting_offset, offset in {0, 1}

  int ell(int r) const { return r + lifting_offset; }
  double sigma_bar() const { return sigma > 1.0 ? sigma : 1.0; }
  void validate() const;

  static SchemeParams sipg(int r, double c_sigma = 10.0);
  static SchemeParams nipg(double sigma = 1.0);
  /// sigma > 0, ell = r
  static SchemeParams ldg(double sigma = 1.0, Vec2 beta = {0.5, 0.5});
  /// sigma = 0, ell = r+1
  static SchemeParams ldg_lifted(Vec2 beta = {0.5, 0.5});
};

/// Coefficients of r_S(phi) or l_S(q): a vector-valued P_ell polynomial
/// supported on the <= 2 elements adjacent to the face.
struct LocalLifting {
  int face = -1;
  int ell = 1;
  std::vector<int> elems;
  // per element, per component, Lagrange coefficients in P_ell
  std::vector<std::array<std::vector<double>, 2>> coeffs;

  Vec2 eval(const Mesh& mesh, int elem, double u, double v) const;
};

/// Lifting r_S: int_Omega r_S(phi).tau = int_S phi.{tau} for tau in P_ell^2.
LocalLifting lift_r(const DGSpace& space, int ell, int face, const VectorFn& phi);
/// Lifting l_S (interior faces): int_Omega l_S(q).tau = int_S q [tau].
LocalLifting lift_l(const DGSpace& space, int ell, int face, const ScalarFn& q);

struct AssembledSystem {
  SparseMatrix A;
  std::vector<double> b;
};

/// Assemble the DG system for -Laplace u = f with Dirichlet data g
/// (pass nullptr for g = 0).
AssembledSystem assemble_system(const DGSpace& space, const SchemeParams& params,
                                const ScalarFn& f, const ScalarFn& g = nullptr);

/// Apply the bilinear form: w^T A v via the assembled matrix.
double bilinear_value(const SparseMatrix& A, const std::vector<double>& w,
                      const std::vector<double>& v);

/// Energy norm (||grad_G v||^2 + sigma_bar ||h^{-1/2}[v]||_Gamma^2)^{1/2};
/// boundary faces included.
double energy_norm(const Field& v, double sigma_bar);
/// Restriction to a subset M of elements and its faces Gamma(M).
double energy_norm_subset(const Field& v, double sigma_bar,
                          const std::vector<int>& subset);

struct ErrorNorms {
  double l2 = 0, h1_broken = 0, energy = 0;
};

/// L2 / broken H1 / energy norms of (u - v); the exact u provides the
/// boundary trace.
ErrorNorms errors_vs_exact(const Field& v, const ScalarFn& u, const VectorFn& grad_u,
                           double sigma_bar);

}  // namespace adgm
