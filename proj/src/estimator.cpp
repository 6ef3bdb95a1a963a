#include "adgm/estimator.hpp"

#include <cmath>

namespace adgm {

double oscillation(const DGSpace& space, const ScalarFn& f, int element) {
  if (!f) return 0.0;
  int r = space.degree();
  const Mesh& mesh = space.mesh();
  const QuadRule& tq = triangle_rule(2 * r + 2);
  AffineMap map = affine_map(mesh, element);
  double h2 = mesh.area(element);  // h_E^2 = |E|
  if (r == 1) {
    // P_0 projection: the mean
    double mean = 0, mass = 0, val2 = 0;
    for (size_t p = 0; p < tq.w.size(); ++p) {
      double w = tq.w[p] * map.det;
      double fv = f(map.to_physical(tq.x[p], tq.y[p]));
      mean += w * fv;
      mass += w;
      val2 += w * fv * fv;
    }
    mean /= mass;
    double err2 = val2 - mass * mean * mean;
    return std::sqrt(std::max(0.0, h2 * err2));
  }
  const ReferenceBasis& rp = ReferenceBasis::get(r - 1);
  int n = rp.size();
  std::vector<double> b(n, 0.0);
  double val2 = 0;
  for (size_t p = 0; p < tq.w.size(); ++p) {
    double w = tq.w[p] * map.det;
    double fv = f(map.to_physical(tq.x[p], tq.y[p]));
    val2 += w * fv * fv;
    for (int a = 0; a < n; ++a) b[a] += w * fv * rp.value(a, tq.x[p], tq.y[p]);
  }
  // projection coefficients c = (det Mref)^{-1} b; ||f - Pf||^2 = ||f||^2 - b.c
  const auto& mi = rp.mass_inv();
  double bc = 0;
  for (int a = 0; a < n; ++a) {
    double c = 0;
    for (int k = 0; k < n; ++k) c += mi[(size_t)a * n + k] * b[k] / map.det;
    bc += b[a] * c;
  }
  return std::sqrt(std::max(0.0, h2 * (val2 - bc)));
}

IndicatorField indicators(const Field& v, const SchemeParams& params, const ScalarFn& f,
                          const ScalarFn& g) {
  const DGSpace& sp = *v.space;
  const Mesh& mesh = sp.mesh();
  int r = sp.degree(), ne = mesh.n_elements();
  IndicatorField out;
  out.total2.assign(ne, 0.0);
  out.residual2.assign(ne, 0.0);
  out.gradjump2.assign(ne, 0.0);
  out.penalty2.assign(ne, 0.0);
  out.osc2.assign(ne, 0.0);

  const QuadRule& tq = triangle_rule(2 * r + 2);
  for (int e = 0; e < ne; ++e) {
    AffineMap map = affine_map(mesh, e);
    double h2 = mesh.area(e);
    double acc = 0;
    for (size_t p = 0; p < tq.w.size(); ++p) {
      double res = (f ? f(map.to_physical(tq.x[p], tq.y[p])) : 0.0) +
                   eval_laplacian(v, e, tq.x[p], tq.y[p]);
      acc += tq.w[p] * map.det * res * res;
    }
    out.residual2[e] = h2 * acc;
    double o = oscillation(sp, f, e);
    out.osc2[e] = o * o;
  }

  // face terms, accumulated per adjacent element (each interior face is
  // integrated by both of its elements, as the definition reads)
  const QuadRule& eq = edge_rule(2 * r + 2);
  for (int fi = 0; fi < mesh.n_faces(); ++fi) {
    const Face& face = mesh.faces[fi];
    double h = mesh.h_face(fi);
    Vec2 n = mesh.face_normal(fi);
    Vec2 p0 = mesh.point(face.v[0]), p1 = mesh.point(face.v[1]);
    int ns = face.boundary() ? 1 : 2;
    AffineMap maps[2];
    for (int s = 0; s < ns; ++s) maps[s] = affine_map(mesh, face.elems[s]);
    double gj = 0, pj = 0;
    for (size_t p = 0; p < eq.w.size(); ++p) {
      Vec2 x = p0 + eq.x[p] * (p1 - p0);
      double W = eq.w[p] * h;
      double u0, v0;
      maps[0].to_reference(x, u0, v0);
      EvalResult ep = eval(v, face.elems[0], u0, v0);
      if (ns == 2) {
        double u1, v1;
        maps[1].to_reference(x, u1, v1);
        EvalResult em = eval(v, face.elems[1], u1, v1);
        double jg = dot(ep.gradient - em.gradient, n);
        double jv = ep.value - em.value;
        gj += W * jg * jg;
        pj += W * jv * jv;
      } else {
        double jv = ep.value - (g ? g(x) : 0.0);
        pj += W * jv * jv;
      }
    }
    for (int s = 0; s < ns; ++s) {
      if (ns == 2) out.gradjump2[face.elems[s]] += h * gj;
      out.penalty2[face.elems[s]] += params.sigma / h * pj;
    }
  }

  for (int e = 0; e < ne; ++e)
    out.total2[e] = out.residual2[e] + out.gradjump2[e] + out.penalty2[e];
  return out;
}

double total(const IndicatorField& ind, const std::vector<int>& subset) {
  double s = 0;
  for (int e : subset) s += ind.total2[e];
  return std::sqrt(s);
}

double total(const IndicatorField& ind) {
  double s = 0;
  for (double t : ind.total2) s += t;
  return std::sqrt(s);
}

}  // namespace adgm
