#include "adgm/forms.hpp"

#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

namespace adgm {

void SchemeParams::validate() const {
  if (theta != 1.0 && theta != -1.0) throw std::runtime_error("theta must be +-1");
  if (gamma != 0.0 && gamma != 1.0) throw std::runtime_error("gamma must be 0 or 1");
  if (sigma < 0) throw std::runtime_error("sigma must be >= 0");
  if (lifting_offset != 0 && lifting_offset != 1)
    throw std::runtime_error("lifting degree must be r or r+1");
  switch (scheme) {
    case Scheme::sipg:
      if (theta != 1 || gamma != 0 || sigma <= 0 || beta.x != 0 || beta.y != 0)
        throw std::runtime_error("invalid SIPG parameters");
      break;
    case Scheme::nipg:
      if (theta != -1 || gamma != 0 || sigma <= 0 || beta.x != 0 || beta.y != 0)
        throw std::runtime_error("invalid NIPG parameters");
      break;
    case Scheme::ldg:
      if (theta != 1 || gamma != 1) throw std::runtime_error("invalid LDG parameters");
      if (!((sigma > 0 && lifting_offset == 0) || (sigma == 0 && lifting_offset == 1)))
        throw std::runtime_error("LDG requires sigma>0,ell=r or sigma=0,ell=r+1");
      break;
  }
}

SchemeParams SchemeParams::sipg(int r, double c_sigma) {
  SchemeParams p;
  p.scheme = Scheme::sipg;
  p.theta = 1;
  p.sigma = c_sigma * r * r;
  return p;
}

SchemeParams SchemeParams::nipg(double sigma) {
  SchemeParams p;
  p.scheme = Scheme::nipg;
  p.theta = -1;
  p.sigma = sigma;
  return p;
}

SchemeParams SchemeParams::ldg(double sigma, Vec2 beta) {
  SchemeParams p;
  p.scheme = Scheme::ldg;
  p.theta = 1;
  p.gamma = 1;
  p.sigma = sigma;
  p.beta = beta;
  p.lifting_offset = 0;
  return p;
}

SchemeParams SchemeParams::ldg_lifted(Vec2 beta) {
  SchemeParams p;
  p.scheme = Scheme::ldg;
  p.theta = 1;
  p.gamma = 1;
  p.sigma = 0;
  p.beta = beta;
  p.lifting_offset = 1;
  return p;
}

namespace {

// Shared per-face quadrature data: physical points, scaled weights, n+, and
// reference coordinates on each adjacent element.
struct FaceQuad {
  int n_sides;
  int elems[2];
  double h;
  Vec2 normal;  // n+ (outward from owner)
  std::vector<Vec2> x;
  std::vector<double> w;                     // includes |S|
  std::vector<std::array<double, 2>> ref[2]; // (u,v) per side
};

FaceQuad face_quad(const Mesh& mesh, int f, int degree) {
  const Face& face = mesh.faces[f];
  FaceQuad fq;
  fq.n_sides = face.boundary() ? 1 : 2;
  fq.elems[0] = face.elems[0];
  fq.elems[1] = face.elems[1];
  fq.h = mesh.h_face(f);
  fq.normal = mesh.face_normal(f);
  Vec2 p0 = mesh.point(face.v[0]), p1 = mesh.point(face.v[1]);
  const QuadRule& q = edge_rule(degree);
  AffineMap maps[2];
  for (int s = 0; s < fq.n_sides; ++s) maps[s] = affine_map(mesh, fq.elems[s]);
  for (size_t p = 0; p < q.w.size(); ++p) {
    Vec2 x = p0 + q.x[p] * (p1 - p0);
    fq.x.push_back(x);
    fq.w.push_back(q.w[p] * fq.h);
    for (int s = 0; s < fq.n_sides; ++s) {
      double u, v;
      maps[s].to_reference(x, u, v);
      fq.ref[s].push_back({u, v});
    }
  }
  return fq;
}

// Trace values and physical gradients of all local basis functions.
struct SideTrace {
  std::vector<double> val;   // [qp * nloc + a]
  std::vector<Vec2> grad;
};

SideTrace side_trace(const Mesh& mesh, const ReferenceBasis& rb, const FaceQuad& fq,
                     int side) {
  SideTrace t;
  int nq = (int)fq.w.size(), nl = rb.size();
  t.val.resize((size_t)nq * nl);
  t.grad.resize((size_t)nq * nl);
  AffineMap map = affine_map(mesh, fq.elems[side]);
  for (int p = 0; p < nq; ++p) {
    double u = fq.ref[side][p][0], v = fq.ref[side][p][1];
    for (int a = 0; a < nl; ++a) {
      t.val[(size_t)p * nl + a] = rb.value(a, u, v);
      double du, dv;
      rb.gradient(a, u, v, du, dv);
      t.grad[(size_t)p * nl + a] = map.push_gradient(du, dv);
    }
  }
  return t;
}

// Lifting contribution of face f restricted to adjacent element `to`:
// coefficient (component d, P_ell basis i) of r_S([w]) + l_S(beta.[w]) as a
// linear map of the w-DOFs on the face's sides. Row layout d*nl + i,
// column layout side*nloc + b.
struct FaceLifting {
  int n_sides = 0;
  int elems[2] = {-1, -1};
  // matrices[to]: (2*nl) x (n_sides*nloc)
  std::vector<double> matrices[2];
  // boundary data lifting r_S(g n) on the owner: 2*nl entries (empty if unused)
  std::vector<double> g_coeffs;
};

FaceLifting face_lifting(const DGSpace& space, const SchemeParams& params, int f,
                         const ScalarFn& g) {
  const Mesh& mesh = space.mesh();
  const ReferenceBasis& rb = space.basis();
  const ReferenceBasis& rl = ReferenceBasis::get(params.ell(space.degree()));
  int nloc = rb.size(), nl = rl.size();
  FaceQuad fq = face_quad(mesh, f, 2 * params.ell(space.degree()) + 2);
  FaceLifting out;
  out.n_sides = fq.n_sides;
  out.elems[0] = fq.elems[0];
  out.elems[1] = fq.elems[1];
  int ncols = fq.n_sides * nloc;
  double mf = fq.n_sides == 2 ? 0.5 : 1.0;
  double bn = dot(params.beta, fq.normal);

  SideTrace tr[2];
  for (int s = 0; s < fq.n_sides; ++s) tr[s] = side_trace(mesh, rb, fq, s);

  for (int to = 0; to < fq.n_sides; ++to) {
    AffineMap map_to = affine_map(mesh, fq.elems[to]);
    double sgn_to = to == 0 ? 1.0 : -1.0;
    // rhs[(d*nl+i) * ncols + col]
    std::vector<double> rhs((size_t)2 * nl * ncols, 0.0);
    std::vector<double> rhs_g((size_t)2 * nl, 0.0);
    for (size_t p = 0; p < fq.w.size(); ++p) {
      double u = fq.ref[to][p][0], v = fq.ref[to][p][1];
      std::vector<double> psi(nl);
      for (int i = 0; i < nl; ++i) psi[i] = rl.value(i, u, v);
      for (int sb = 0; sb < fq.n_sides; ++sb) {
        double sgn_b = sb == 0 ? 1.0 : -1.0;
        for (int b = 0; b < nloc; ++b) {
          double wv = sgn_b * tr[sb].val[p * nloc + b];
          // r_S([w]): int_S [w]_d * mf * psi_i
          // l_S(beta.[w]) (interior): int_S (bn*wv) * sgn_to * n_d * psi_i
          double r_part = mf * wv;
          double l_part = fq.n_sides == 2 ? bn * wv * sgn_to : 0.0;
          double fac = fq.w[p] * (r_part + l_part);
          for (int d = 0; d < 2; ++d) {
            double nd = d == 0 ? fq.normal.x : fq.normal.y;
            for (int i = 0; i < nl; ++i)
              rhs[((size_t)d * nl + i) * ncols + sb * nloc + b] += fac * nd * psi[i];
          }
        }
      }
      if (g && to == 0 && fq.n_sides == 1) {
        double gv = g(fq.x[p]);
        for (int d = 0; d < 2; ++d) {
          double nd = d == 0 ? fq.normal.x : fq.normal.y;
          for (int i = 0; i < nl; ++i)
            rhs_g[(size_t)d * nl + i] += fq.w[p] * gv * nd * psi[i];
        }
      }
    }
    // solve (det * Mref) c = rhs per component and column
    const auto& mi = rl.mass_inv();
    std::vector<double>& mat = out.matrices[to];
    mat.assign((size_t)2 * nl * ncols, 0.0);
    for (int d = 0; d < 2; ++d)
      for (int i = 0; i < nl; ++i)
        for (int k = 0; k < nl; ++k) {
          double m = mi[(size_t)i * nl + k] / map_to.det;
          if (m == 0) continue;
          for (int c = 0; c < ncols; ++c)
            mat[((size_t)d * nl + i) * ncols + c] +=
                m * rhs[((size_t)d * nl + k) * ncols + c];
        }
    if (g && to == 0 && fq.n_sides == 1) {
      out.g_coeffs.assign((size_t)2 * nl, 0.0);
      for (int d = 0; d < 2; ++d)
        for (int i = 0; i < nl; ++i)
          for (int k = 0; k < nl; ++k)
            out.g_coeffs[(size_t)d * nl + i] +=
                mi[(size_t)i * nl + k] / map_to.det * rhs_g[(size_t)d * nl + k];
    }
  }
  return out;
}

}  // namespace

Vec2 LocalLifting::eval(const Mesh& /*mesh*/, int elem, double u, double v) const {
  const ReferenceBasis& rl = ReferenceBasis::get(ell);
  for (size_t s = 0; s < elems.size(); ++s) {
    if (elems[s] != elem) continue;
    Vec2 out{0, 0};
    for (int i = 0; i < rl.size(); ++i) {
      double phi = rl.value(i, u, v);
      out.x += coeffs[s][0][i] * phi;
      out.y += coeffs[s][1][i] * phi;
    }
    return out;
  }
  return {0, 0};  // vanishes outside omega(S)
}

LocalLifting lift_r(const DGSpace& space, int ell, int face, const VectorFn& phi) {
  const Mesh& mesh = space.mesh();
  const ReferenceBasis& rl = ReferenceBasis::get(ell);
  int nl = rl.size();
  FaceQuad fq = face_quad(mesh, face, 2 * ell + 2);
  double mf = fq.n_sides == 2 ? 0.5 : 1.0;
  LocalLifting out;
  out.face = face;
  out.ell = ell;
  for (int s = 0; s < fq.n_sides; ++s) {
    out.elems.push_back(fq.elems[s]);
    AffineMap map = affine_map(mesh, fq.elems[s]);
    std::array<std::vector<double>, 2> rhs = {std::vector<double>(nl, 0.0),
                                              std::vector<double>(nl, 0.0)};
    for (size_t p = 0; p < fq.w.size(); ++p) {
      Vec2 ph = phi(fq.x[p]);
      double u = fq.ref[s][p][0], v = fq.ref[s][p][1];
      for (int i = 0; i < nl; ++i) {
        double psv = rl.value(i, u, v);
        rhs[0][i] += fq.w[p] * mf * ph.x * psv;
        rhs[1][i] += fq.w[p] * mf * ph.y * psv;
      }
    }
    std::array<std::vector<double>, 2> c = {std::vector<double>(nl, 0.0),
                                            std::vector<double>(nl, 0.0)};
    const auto& mi = rl.mass_inv();
    for (int d = 0; d < 2; ++d)
      for (int i = 0; i < nl; ++i)
        for (int k = 0; k < nl; ++k)
          c[d][i] += mi[(size_t)i * nl + k] / map.det * rhs[d][k];
    out.coeffs.push_back(std::move(c));
  }
  return out;
}

LocalLifting lift_l(const DGSpace& space, int ell, int face, const ScalarFn& q) {
  const Mesh& mesh = space.mesh();
  if (mesh.faces[face].boundary())
    throw std::runtime_error("lift_l is defined on interior faces");
  const ReferenceBasis& rl = ReferenceBasis::get(ell);
  int nl = rl.size();
  FaceQuad fq = face_quad(mesh, face, 2 * ell + 2);
  LocalLifting out;
  out.face = face;
  out.ell = ell;
  for (int s = 0; s < fq.n_sides; ++s) {
    out.elems.push_back(fq.elems[s]);
    double sgn = s == 0 ? 1.0 : -1.0;
    AffineMap map = affine_map(mesh, fq.elems[s]);
    std::array<std::vector<double>, 2> rhs = {std::vector<double>(nl, 0.0),
                                              std::vector<double>(nl, 0.0)};
    for (size_t p = 0; p < fq.w.size(); ++p) {
      double qv = q(fq.x[p]);
      double u = fq.ref[s][p][0], v = fq.ref[s][p][1];
      for (int i = 0; i < nl; ++i) {
        double psv = rl.value(i, u, v);
        rhs[0][i] += fq.w[p] * qv * sgn * fq.normal.x * psv;
        rhs[1][i] += fq.w[p] * qv * sgn * fq.normal.y * psv;
      }
    }
    std::array<std::vector<double>, 2> c = {std::vector<double>(nl, 0.0),
                                            std::vector<double>(nl, 0.0)};
    const auto& mi = rl.mass_inv();
    for (int d = 0; d < 2; ++d)
      for (int i = 0; i < nl; ++i)
        for (int k = 0; k < nl; ++k)
          c[d][i] += mi[(size_t)i * nl + k] / map.det * rhs[d][k];
    out.coeffs.push_back(std::move(c));
  }
  return out;
}

AssembledSystem assemble_system(const DGSpace& space, const SchemeParams& params,
                                const ScalarFn& f, const ScalarFn& g) {
  params.validate();
  const Mesh& mesh = space.mesh();
  const ReferenceBasis& rb = space.basis();
  int r = space.degree(), nloc = rb.size(), n = space.n_dofs();
  std::vector<std::map<int, double>> rows(n);
  std::vector<double> b(n, 0.0);

  // broken stiffness and load
  const QuadRule& tq = triangle_rule(2 * r + 2);
  for (int e = 0; e < mesh.n_elements(); ++e) {
    AffineMap map = affine_map(mesh, e);
    std::vector<Vec2> grads(nloc);
    for (size_t p = 0; p < tq.w.size(); ++p) {
      double w = tq.w[p] * map.det;
      for (int a = 0; a < nloc; ++a) {
        double du, dv;
        rb.gradient(a, tq.x[p], tq.y[p], du, dv);
        grads[a] = map.push_gradient(du, dv);
      }
      double fv = f ? f(map.to_physical(tq.x[p], tq.y[p])) : 0.0;
      for (int a = 0; a < nloc; ++a) {
        int ia = space.dof(e, a);
        if (fv != 0) b[ia] += w * fv * rb.value(a, tq.x[p], tq.y[p]);
        for (int c = 0; c < nloc; ++c)
          rows[ia][space.dof(e, c)] += w * dot(grads[a], grads[c]);
      }
    }
  }

  // face terms: consistency, beta, penalty, Dirichlet rhs
  for (int fi = 0; fi < mesh.n_faces(); ++fi) {
    FaceQuad fq = face_quad(mesh, fi, 2 * r + 2);
    int ns = fq.n_sides;
    double mf = ns == 2 ? 0.5 : 1.0;
    double bn = dot(params.beta, fq.normal);
    SideTrace tr[2];
    for (int s = 0; s < ns; ++s) tr[s] = side_trace(mesh, rb, fq, s);
    int nl2 = ns * nloc;
    std::vector<double> block((size_t)nl2 * nl2, 0.0);
    for (size_t p = 0; p < fq.w.size(); ++p) {
      double W = fq.w[p];
      for (int sa = 0; sa < ns; ++sa) {
        double sgn_a = sa == 0 ? 1.0 : -1.0;
        for (int a = 0; a < nloc; ++a) {
          double va = tr[sa].val[p * nloc + a];
          double gan = dot(tr[sa].grad[p * nloc + a], fq.normal);
          for (int sb = 0; sb < ns; ++sb) {
            double sgn_b = sb == 0 ? 1.0 : -1.0;
            for (int c = 0; c < nloc; ++c) {
              double vb = tr[sb].val[p * nloc + c];
              double gbn = dot(tr[sb].grad[p * nloc + c], fq.normal);
              double term = -mf * gbn * sgn_a * va               // -{grad w}.[v]
                            - params.theta * mf * gan * sgn_b * vb // -theta {grad v}.[w]
                            + params.sigma / fq.h * sgn_a * va * sgn_b * vb;
              if (ns == 2)
                term += bn * sgn_b * vb * sgn_a * gan  // beta.[w] [grad v]
                        + sgn_b * gbn * bn * sgn_a * va;  // [grad w] beta.[v]
              block[(size_t)(sa * nloc + a) * nl2 + sb * nloc + c] += W * term;
            }
          }
          if (ns == 1 && g) {
            double gv = g(fq.x[p]);
            b[space.dof(fq.elems[0], a)] +=
                W * (-params.theta * gan * gv + params.sigma / fq.h * va * gv);
          }
        }
      }
    }
    for (int sa = 0; sa < ns; ++sa)
      for (int a = 0; a < nloc; ++a) {
        int ia = space.dof(fq.elems[sa], a);
        for (int sb = 0; sb < ns; ++sb)
          for (int c = 0; c < nloc; ++c) {
            double v = block[(size_t)(sa * nloc + a) * nl2 + sb * nloc + c];
            if (v != 0) rows[ia][space.dof(fq.elems[sb], c)] += v;
          }
      }
  }

  // gamma-weighted global lifting product, assembled element-wise from the
  // local liftings (patches omega(S) overlap at most d+1 times)
  if (params.gamma != 0) {
    const ReferenceBasis& rl = ReferenceBasis::get(params.ell(r));
    int nl = rl.size();
    std::vector<FaceLifting> lifts(mesh.n_faces());
    for (int fi = 0; fi < mesh.n_faces(); ++fi)
      lifts[fi] = face_lifting(space, params, fi, g);

    for (int e = 0; e < mesh.n_elements(); ++e) {
      // column space: this element's and its edge neighbors' DOFs
      std::vector<int> col_elems = {e};
      for (int le = 0; le < 3; ++le) {
        const Face& fc = mesh.faces[mesh.element_faces[e][le]];
        int other = fc.elems[0] == e ? fc.elems[1] : fc.elems[0];
        if (other >= 0) col_elems.push_back(other);
      }
      auto col_of = [&](int elem) {
        for (size_t i = 0; i < col_elems.size(); ++i)
          if (col_elems[i] == elem) return (int)i;
        return -1;
      };
      int ncols = (int)col_elems.size() * nloc;
      std::vector<double> GE((size_t)2 * nl * ncols, 0.0);
      std::vector<double> gvec((size_t)2 * nl, 0.0);
      bool has_g = false;
      for (int le = 0; le < 3; ++le) {
        int fi = mesh.element_faces[e][le];
        const FaceLifting& fl = lifts[fi];
        int to = fl.elems[0] == e ? 0 : 1;
        int fcols = fl.n_sides * nloc;
        for (int row = 0; row < 2 * nl; ++row)
          for (int sb = 0; sb < fl.n_sides; ++sb) {
            int off = col_of(fl.elems[sb]) * nloc;
            for (int c = 0; c < nloc; ++c)
              GE[(size_t)row * ncols + off + c] +=
                  fl.matrices[to][(size_t)row * fcols + sb * nloc + c];
          }
        if (to == 0 && !fl.g_coeffs.empty()) {
          has_g = true;
          for (int row = 0; row < 2 * nl; ++row) gvec[row] += fl.g_coeffs[row];
        }
      }
      // C = gamma * GE^T (det * Mref per component) GE
      AffineMap map = affine_map(mesh, e);
      const auto& M = rl.mass();
      std::vector<double> T((size_t)2 * nl * ncols, 0.0);
      for (int d = 0; d < 2; ++d)
        for (int i = 0; i < nl; ++i)
          for (int k = 0; k < nl; ++k) {
            double m = M[(size_t)i * nl + k] * map.det;
            if (m == 0) continue;
            for (int c = 0; c < ncols; ++c)
              T[((size_t)d * nl + i) * ncols + c] +=
                  m * GE[((size_t)d * nl + k) * ncols + c];
          }
      for (int ca = 0; ca < ncols; ++ca) {
        int ia = space.dof(col_elems[ca / nloc], ca % nloc);
        for (int cb = 0; cb < ncols; ++cb) {
          double s = 0;
          for (int row = 0; row < 2 * nl; ++row)
            s += GE[(size_t)row * ncols + ca] * T[(size_t)row * ncols + cb];
          if (s != 0)
            rows[ia][space.dof(col_elems[cb / nloc], cb % nloc)] += params.gamma * s;
        }
        if (has_g) {
          double s = 0;
          for (int row = 0; row < 2 * nl; ++row)
            s += gvec[row] * T[(size_t)row * ncols + ca];
          b[ia] += params.gamma * s;
        }
      }
    }
  }

  AssembledSystem sys;
  sys.A = SparseMatrix(rows);
  sys.b = std::move(b);
  return sys;
}

double bilinear_value(const SparseMatrix& A, const std::vector<double>& w,
                      const std::vector<double>& v) {
  std::vector<double> Av;
  A.multiply(v, Av);
  return dot_product(w, Av);
}

namespace {

double jump_term(const Field& field, const Mesh& mesh, int fi, const ScalarFn& u_exact) {
  // integral over the face of [v]^2 (or (v-u)^2 on the boundary when u given)
  const DGSpace& sp = *field.space;
  FaceQuad fq = face_quad(mesh, fi, 2 * sp.degree() + 2);
  double s = 0;
  for (size_t p = 0; p < fq.w.size(); ++p) {
    double j;
    if (fq.n_sides == 2) {
      double vp = eval(field, fq.elems[0], fq.ref[0][p][0], fq.ref[0][p][1]).value;
      double vm = eval(field, fq.elems[1], fq.ref[1][p][0], fq.ref[1][p][1]).value;
      j = vp - vm;
    } else {
      double vp = eval(field, fq.elems[0], fq.ref[0][p][0], fq.ref[0][p][1]).value;
      j = vp - (u_exact ? u_exact(fq.x[p]) : 0.0);
    }
    s += fq.w[p] * j * j;
  }
  return s / fq.h;
}

}  // namespace

double energy_norm(const Field& v, double sigma_bar) {
  const Mesh& mesh = v.space->mesh();
  std::vector<int> all(mesh.n_elements());
  for (int e = 0; e < mesh.n_elements(); ++e) all[e] = e;
  return energy_norm_subset(v, sigma_bar, all);
}

double energy_norm_subset(const Field& v, double sigma_bar,
                          const std::vector<int>& subset) {
  const DGSpace& sp = *v.space;
  const Mesh& mesh = sp.mesh();
  const QuadRule& tq = triangle_rule(2 * sp.degree() + 2);
  double grad2 = 0;
  std::set<int> faces;
  for (int e : subset) {
    AffineMap map = affine_map(mesh, e);
    for (size_t p = 0; p < tq.w.size(); ++p) {
      Vec2 gr = eval(v, e, tq.x[p], tq.y[p]).gradient;
      grad2 += tq.w[p] * map.det * dot(gr, gr);
    }
    for (int le = 0; le < 3; ++le) faces.insert(mesh.element_faces[e][le]);
  }
  double jump2 = 0;
  for (int fi : faces) jump2 += jump_term(v, mesh, fi, nullptr);
  return std::sqrt(grad2 + sigma_bar * jump2);
}

ErrorNorms errors_vs_exact(const Field& v, const ScalarFn& u, const VectorFn& grad_u,
                           double sigma_bar) {
  const DGSpace& sp = *v.space;
  const Mesh& mesh = sp.mesh();
  const QuadRule& tq = triangle_rule(2 * sp.degree() + 2);
  double l2 = 0, h1 = 0;
  for (int e = 0; e < mesh.n_elements(); ++e) {
    AffineMap map = affine_map(mesh, e);
    for (size_t p = 0; p < tq.w.size(); ++p) {
      Vec2 x = map.to_physical(tq.x[p], tq.y[p]);
      EvalResult ev = eval(v, e, tq.x[p], tq.y[p]);
      double de = ev.value - u(x);
      Vec2 dg = ev.gradient - grad_u(x);
      l2 += tq.w[p] * map.det * de * de;
      h1 += tq.w[p] * map.det * dot(dg, dg);
    }
  }
  double jump2 = 0;
  for (int fi = 0; fi < mesh.n_faces(); ++fi) jump2 += jump_term(v, mesh, fi, u);
  ErrorNorms out;
  out.l2 = std::sqrt(l2);
  out.h1_broken = std::sqrt(h1);
  out.energy = std::sqrt(h1 + sigma_bar * jump2);
  return out;
}

}  // namespace adgm
