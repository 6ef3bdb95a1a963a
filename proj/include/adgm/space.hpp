#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "adgm/mesh.hpp"
#include "adgm/quadrature.hpp"

namespace adgm {

/// Lagrange basis on the uniform lattice of the reference triangle.
/// Node (i,j) -> (i/r, j/r), i+j <= r, ordered j-major within i.
class ReferenceBasis {
public:
  explicit ReferenceBasis(int degree);

  int degree() const { return r_; }
  int size() const { return n_; }
  double node_u(int a) const { return nodes_[a].first; }
  double node_v(int a) const { return nodes_[a].second; }

  double value(int a, double u, double v) const;
  void gradient(int a, double u, double v, double& du, double& dv) const;
  /// Second derivatives (uu, uv, vv).
  void hessian(int a, double u, double v, double& duu, double& duv, double& dvv) const;

  /// Reference mass matrix (row-major, size n x n) and its inverse.
  const std::vector<double>& mass() const { return mass_; }
  const std::vector<double>& mass_inv() const { return mass_inv_; }

  /// Topological classification of node a: kind 0 = corner (which = local
  /// vertex), kind 1 = edge (which = local edge, pos = 1..r-1 steps from the
  /// edge's first endpoint v[(which+1)%3]), kind 2 = interior.
  struct NodeTopo {
    int kind, which, pos;
  };
  const NodeTopo& topo(int a) const { return topo_[a]; }

  static const ReferenceBasis& get(int degree);

private:
  double mono(int k, double u, double v, int du, int dv) const;
  static double mono_raw(std::pair<int, int> pw, double u, double v);
  int r_, n_;
  std::vector<std::pair<double, double>> nodes_;
  std::vector<std::pair<int, int>> powers_;
  std::vector<double> coef_;  // coef_[a*n+k]: basis a in monomial k
  std::vector<double> mass_, mass_inv_;
  std::vector<NodeTopo> topo_;
};

/// Affine map from the reference triangle to element e.
struct AffineMap {
  Vec2 b;            // image of (0,0) = v[0]
  double j[2][2];    // columns v[1]-v[0], v[2]-v[0]
  double jinv[2][2];
  double det;        // = 2|E|

  Vec2 to_physical(double u, double v) const {
    return {b.x + j[0][0] * u + j[0][1] * v, b.y + j[1][0] * u + j[1][1] * v};
  }
  void to_reference(Vec2 p, double& u, double& v) const {
    double dx = p.x - b.x, dy = p.y - b.y;
    u = jinv[0][0] * dx + jinv[0][1] * dy;
    v = jinv[1][0] * dx + jinv[1][1] * dy;
  }
  /// Physical gradient from reference gradient: J^{-T} g_ref.
  Vec2 push_gradient(double du, double dv) const {
    return {jinv[0][0] * du + jinv[1][0] * dv, jinv[0][1] * du + jinv[1][1] * dv};
  }
};

AffineMap affine_map(const Mesh& mesh, int e);

/// Fully discontinuous P_r space; DOFs are element-major Lagrange values.
class DGSpace {
public:
  DGSpace(std::shared_ptr<const Mesh> mesh, int degree);

  const Mesh& mesh() const { return *mesh_; }
  std::shared_ptr<const Mesh> mesh_ptr() const { return mesh_; }
  int degree() const { return r_; }
  int local_size() const { return basis().size(); }
  int n_dofs() const { return mesh_->n_elements() * local_size(); }
  int dof(int element, int local) const { return element * local_size() + local; }
  const ReferenceBasis& basis() const { return ReferenceBasis::get(r_); }

  Vec2 node_position(int element, int local) const;

private:
  std::shared_ptr<const Mesh> mesh_;
  int r_;
};

DGSpace build_space(std::shared_ptr<const Mesh> mesh, int degree);

struct Field {
  std::shared_ptr<const DGSpace> space;
  std::vector<double> coeffs;
};

Field make_field(std::shared_ptr<const DGSpace> space);

struct EvalResult {
  double value;
  Vec2 gradient;
};

/// Value and physical gradient at a reference point of an element.
EvalResult eval(const Field& field, int element, double u, double v);
/// Physical Laplacian at a reference point of an element.
double eval_laplacian(const Field& field, int element, double u, double v);

/// Dual moment c_z with int_E v Psi_z^E dx, computed through the local mass
/// matrix. For v in P_r this recovers the nodal value at z.
double dual_moment(const Field& field, int element, int local_node);
double dual_moment(const DGSpace& space, int element,
                   const std::function<double(Vec2)>& v, int local_node,
                   int quad_degree);
/// All local dual moments at once (one mass solve).
std::vector<double> dual_moments(const Field& field, int element);

/// Nodal interpolation of a callable.
Field interpolate(const std::function<double(Vec2)>& u, std::shared_ptr<const DGSpace> space);

}  // namespace adgm
