#include "adgm/space.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace adgm {

ReferenceBasis::ReferenceBasis(int degree) : r_(degree) {
  if (degree < 1) throw std::runtime_error("degree must be >= 1");
  n_ = (degree + 1) * (degree + 2) / 2;
  for (int i = 0; i <= r_; ++i)
    for (int j = 0; j <= r_ - i; ++j) {
      nodes_.emplace_back((double)i / r_, (double)j / r_);
      // topology: corners are (0,0)=v0, (r,0)=v1, (0,r)=v2
      NodeTopo t;
      if (i == 0 && j == 0) t = {0, 0, 0};
      else if (i == r_ && j == 0) t = {0, 1, 0};
      else if (i == 0 && j == r_) t = {0, 2, 0};
      // edge 0 opposite v0: i+j=r, endpoints v1,v2, pos = steps from v1
      else if (i + j == r_) t = {1, 0, j};
      // edge 1 opposite v1: i=0, endpoints v2,v0, pos = steps from v2
      else if (i == 0) t = {1, 1, r_ - j};
      // edge 2 opposite v2: j=0, endpoints v0,v1, pos = steps from v0
      else if (j == 0) t = {1, 2, i};
      else t = {2, 0, 0};
      topo_.push_back(t);
    }
  for (int d = 0; d <= r_; ++d)
    for (int a = 0; a <= d; ++a) powers_.emplace_back(d - a, a);

  Eigen::MatrixXd V(n_, n_);
  for (int a = 0; a < n_; ++a)
    for (int k = 0; k < n_; ++k)
      V(a, k) = mono_raw(powers_[k], nodes_[a].first, nodes_[a].second);
  Eigen::MatrixXd C = V.inverse();  // column a = coefficients of basis a
  coef_.resize((size_t)n_ * n_);
  for (int a = 0; a < n_; ++a)
    for (int k = 0; k < n_; ++k) coef_[(size_t)a * n_ + k] = C(k, a);

  // reference mass matrix by quadrature
  const QuadRule& q = triangle_rule(2 * r_ + 2);
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n_, n_);
  for (size_t p = 0; p < q.w.size(); ++p) {
    Eigen::VectorXd phi(n_);
    for (int a = 0; a < n_; ++a) phi(a) = value(a, q.x[p], q.y[p]);
    M += q.w[p] * phi * phi.transpose();
  }
  Eigen::MatrixXd Mi = M.inverse();
  mass_.resize((size_t)n_ * n_);
  mass_inv_.resize((size_t)n_ * n_);
  for (int a = 0; a < n_; ++a)
    for (int b = 0; b < n_; ++b) {
      mass_[(size_t)a * n_ + b] = M(a, b);
      mass_inv_[(size_t)a * n_ + b] = Mi(a, b);
    }
}

double ReferenceBasis::mono_raw(std::pair<int, int> pw, double u, double v) {
  return std::pow(u, pw.first) * std::pow(v, pw.second);
}

double ReferenceBasis::mono(int k, double u, double v, int du, int dv) const {
  auto [p, q] = powers_[k];
  double c = 1;
  for (int d = 0; d < du; ++d) c *= p - d;
  for (int d = 0; d < dv; ++d) c *= q - d;
  if (p - du < 0 || q - dv < 0) return 0;
  return c * std::pow(u, p - du) * std::pow(v, q - dv);
}

double ReferenceBasis::value(int a, double u, double v) const {
  double s = 0;
  for (int k = 0; k < n_; ++k) s += coef_[(size_t)a * n_ + k] * mono(k, u, v, 0, 0);
  return s;
}

void ReferenceBasis::gradient(int a, double u, double v, double& du, double& dv) const {
  du = dv = 0;
  for (int k = 0; k < n_; ++k) {
    double c = coef_[(size_t)a * n_ + k];
    du += c * mono(k, u, v, 1, 0);
    dv += c * mono(k, u, v, 0, 1);
  }
}

void ReferenceBasis::hessian(int a, double u, double v, double& duu, double& duv,
                             double& dvv) const {
  duu = duv = dvv = 0;
  for (int k = 0; k < n_; ++k) {
    double c = coef_[(size_t)a * n_ + k];
    duu += c * mono(k, u, v, 2, 0);
    duv += c * mono(k, u, v, 1, 1);
    dvv += c * mono(k, u, v, 0, 2);
  }
}

const ReferenceBasis& ReferenceBasis::get(int degree) {
  static std::map<int, ReferenceBasis> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(degree);
  if (it == cache.end()) it = cache.emplace(degree, ReferenceBasis(degree)).first;
  return it->second;
}

AffineMap affine_map(const Mesh& mesh, int e) {
  AffineMap m;
  Vec2 a = mesh.corner(e, 0), b = mesh.corner(e, 1), c = mesh.corner(e, 2);
  m.b = a;
  m.j[0][0] = b.x - a.x;
  m.j[1][0] = b.y - a.y;
  m.j[0][1] = c.x - a.x;
  m.j[1][1] = c.y - a.y;
  m.det = m.j[0][0] * m.j[1][1] - m.j[0][1] * m.j[1][0];
  double id = 1.0 / m.det;
  m.jinv[0][0] = m.j[1][1] * id;
  m.jinv[0][1] = -m.j[0][1] * id;
  m.jinv[1][0] = -m.j[1][0] * id;
  m.jinv[1][1] = m.j[0][0] * id;
  return m;
}

DGSpace::DGSpace(std::shared_ptr<const Mesh> mesh, int degree)
    : mesh_(std::move(mesh)), r_(degree) {
  if (degree < 1) throw std::runtime_error("DG space requires degree >= 1");
  ReferenceBasis::get(degree);  // warm the cache
}

Vec2 DGSpace::node_position(int element, int local) const {
  const ReferenceBasis& rb = basis();
  return affine_map(*mesh_, element).to_physical(rb.node_u(local), rb.node_v(local));
}

DGSpace build_space(std::shared_ptr<const Mesh> mesh, int degree) {
  return DGSpace(std::move(mesh), degree);
}

Field make_field(std::shared_ptr<const DGSpace> space) {
  Field f;
  f.coeffs.assign(space->n_dofs(), 0.0);
  f.space = std::move(space);
  return f;
}

EvalResult eval(const Field& field, int element, double u, double v) {
  const DGSpace& sp = *field.space;
  const ReferenceBasis& rb = sp.basis();
  AffineMap map = affine_map(sp.mesh(), element);
  double val = 0, du = 0, dv = 0;
  for (int a = 0; a < rb.size(); ++a) {
    double c = field.coeffs[sp.dof(element, a)];
    if (c == 0) continue;
    val += c * rb.value(a, u, v);
    double gu, gv;
    rb.gradient(a, u, v, gu, gv);
    du += c * gu;
    dv += c * gv;
  }
  return {val, map.push_gradient(du, dv)};
}

double eval_laplacian(const Field& field, int element, double u, double v) {
  const DGSpace& sp = *field.space;
  const ReferenceBasis& rb = sp.basis();
  AffineMap m = affine_map(sp.mesh(), element);
  // physical Hessian = J^{-T} H_ref J^{-1}; Laplacian is its trace
  double huu = 0, huv = 0, hvv = 0;
  for (int a = 0; a < rb.size(); ++a) {
    double c = field.coeffs[sp.dof(element, a)];
    if (c == 0) continue;
    double a_uu, a_uv, a_vv;
    rb.hessian(a, u, v, a_uu, a_uv, a_vv);
    huu += c * a_uu;
    huv += c * a_uv;
    hvv += c * a_vv;
  }
  double lap = 0;
  for (int d = 0; d < 2; ++d) {
    double r0 = m.jinv[0][d], r1 = m.jinv[1][d];  // column d of J^{-1}
    lap += r0 * (huu * r0 + huv * r1) + r1 * (huv * r0 + hvv * r1);
  }
  return lap;
}

std::vector<double> dual_moments(const Field& field, int element) {
  const DGSpace& sp = *field.space;
  const ReferenceBasis& rb = sp.basis();
  int n = rb.size();
  // For v in span{Phi}, moments against the dual basis are simply the
  // coefficients; compute through the mass system to honor the definition.
  const QuadRule& q = triangle_rule(2 * sp.degree() + 2);
  double detj = affine_map(sp.mesh(), element).det;
  std::vector<double> b(n, 0.0);
  for (size_t p = 0; p < q.w.size(); ++p) {
    double v = 0;
    std::vector<double> phi(n);
    for (int a = 0; a < n; ++a) {
      phi[a] = rb.value(a, q.x[p], q.y[p]);
      v += field.coeffs[sp.dof(element, a)] * phi[a];
    }
    for (int a = 0; a < n; ++a) b[a] += q.w[p] * detj * v * phi[a];
  }
  // c = (detj * M_ref)^{-1} b
  std::vector<double> c(n, 0.0);
  const auto& mi = rb.mass_inv();
  for (int a = 0; a < n; ++a)
    for (int k = 0; k < n; ++k) c[a] += mi[(size_t)a * n + k] * b[k] / detj;
  return c;
}

double dual_moment(const Field& field, int element, int local_node) {
  return dual_moments(field, element)[local_node];
}

double dual_moment(const DGSpace& space, int element,
                   const std::function<double(Vec2)>& v, int local_node,
                   int quad_degree) {
  const ReferenceBasis& rb = space.basis();
  int n = rb.size();
  const QuadRule& q = triangle_rule(quad_degree);
  AffineMap m = affine_map(space.mesh(), element);
  std::vector<double> b(n, 0.0);
  for (size_t p = 0; p < q.w.size(); ++p) {
    double val = v(m.to_physical(q.x[p], q.y[p]));
    for (int a = 0; a < n; ++a)
      b[a] += q.w[p] * m.det * val * rb.value(a, q.x[p], q.y[p]);
  }
  const auto& mi = rb.mass_inv();
  double c = 0;
  for (int k = 0; k < n; ++k) c += mi[(size_t)local_node * n + k] * b[k] / m.det;
  return c;
}

Field interpolate(const std::function<double(Vec2)>& u,
                  std::shared_ptr<const DGSpace> space) {
  Field f = make_field(space);
  const DGSpace& sp = *f.space;
  for (int e = 0; e < sp.mesh().n_elements(); ++e)
    for (int a = 0; a < sp.local_size(); ++a)
      f.coeffs[sp.dof(e, a)] = u(sp.node_position(e, a));
  return f;
}

}  // namespace adgm
