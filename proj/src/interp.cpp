#include "adgm/interp.hpp"

#include <cmath>
#include <map>
#include <stdexcept>
#include <tuple>

#include "adgm/analysis.hpp"

namespace adgm {

NodeTable build_node_table(const DGSpace& space) {
  const Mesh& mesh = space.mesh();
  const ReferenceBasis& rb = space.basis();
  int r = space.degree(), nloc = rb.size();
  NodeTable t;
  t.node_of.assign((size_t)mesh.n_elements() * nloc, -1);

  std::map<int, int> vertex_node;              // global vertex -> node
  std::map<std::tuple<int, int, int>, int> edge_node;  // (vmin,vmax,pos) -> node

  std::set<EdgeKey> boundary_edges;
  for (const Face& f : mesh.faces)
    if (f.boundary()) boundary_edges.insert(edge_key(f.v[0], f.v[1]));

  auto new_node = [&](bool bnd) {
    t.boundary.push_back(bnd ? 1 : 0);
    t.incidence.emplace_back();
    return t.n_nodes++;
  };

  for (int e = 0; e < mesh.n_elements(); ++e) {
    const auto& v = mesh.elements[e].v;
    for (int a = 0; a < nloc; ++a) {
      const auto& topo = rb.topo(a);
      int id;
      if (topo.kind == 0) {
        int gv = v[topo.which];
        auto it = vertex_node.find(gv);
        if (it == vertex_node.end())
          it = vertex_node.emplace(gv, new_node(mesh.vertices[gv].boundary)).first;
        id = it->second;
      } else if (topo.kind == 1) {
        // endpoints in convention order (v[(which+1)%3], v[(which+2)%3])
        int p = v[(topo.which + 1) % 3], q = v[(topo.which + 2) % 3];
        int pos = topo.pos;
        if (p > q) {
          std::swap(p, q);
          pos = r - pos;
        }
        auto key = std::make_tuple(p, q, pos);
        auto it = edge_node.find(key);
        if (it == edge_node.end())
          it = edge_node.emplace(key, new_node(boundary_edges.count(edge_key(p, q)) > 0))
                   .first;
        id = it->second;
      } else {
        id = new_node(false);
      }
      t.node_of[(size_t)e * nloc + a] = id;
      t.incidence[id].emplace_back(e, a);
    }
  }
  return t;
}

Field conforming_interp(const Field& v) {
  const DGSpace& sp = *v.space;
  int nloc = sp.local_size();
  NodeTable t = build_node_table(sp);
  Field out = make_field(v.space);
  for (int z = 0; z < t.n_nodes; ++z) {
    double val = 0;
    if (!t.boundary[z]) {
      for (auto [e, a] : t.incidence[z]) val += v.coeffs[sp.dof(e, a)];
      val /= (double)t.incidence[z].size();
    }
    for (auto [e, a] : t.incidence[z]) out.coeffs[(size_t)e * nloc + a] = val;
  }
  return out;
}

NodeClassification classify_nodes(const MeshForest& forest, int k, int degree) {
  auto space = DGSpace(forest.mesh_ptr(k), degree);
  NodeClassification nc;
  nc.table = build_node_table(space);
  SequenceClassification cls = classify(forest);
  const auto& pp = cls.levels[k].plusplus;
  nc.near_plusplus.assign(nc.table.n_nodes, 0);
  for (int z = 0; z < nc.table.n_nodes; ++z)
    for (auto [e, a] : nc.table.incidence[z])
      if (pp[e]) nc.near_plusplus[z] = 1;
  return nc;
}

namespace {

// moments[e][y] = coefficient recovered from int_E v Psi_y^E, with v living on
// the fine mesh; exact composite quadrature over the descendants of E.
std::vector<std::vector<double>> coarse_dual_moments(const MeshForest& forest, int k,
                                                     int l, const Field& v,
                                                     const DGSpace& coarse_space) {
  const Mesh& coarse = forest.mesh(k);
  const Mesh& fine = forest.mesh(l);
  const DGSpace& fsp = *v.space;
  if (&fsp.mesh() != &fine)
    throw std::runtime_error("quasi_interp: field does not live on forest mesh l");
  const ReferenceBasis& rb = coarse_space.basis();
  int nloc = rb.size();
  const QuadRule& tq = triangle_rule(2 * coarse_space.degree() + 2);

  std::vector<int> anc = forest.ancestor_map(k, l);
  std::vector<std::vector<double>> rhs(coarse.n_elements(),
                                       std::vector<double>(nloc, 0.0));
  std::vector<AffineMap> cmaps(coarse.n_elements());
  for (int e = 0; e < coarse.n_elements(); ++e) cmaps[e] = affine_map(coarse, e);

  for (int fe = 0; fe < fine.n_elements(); ++fe) {
    int ce = anc[fe];
    AffineMap fmap = affine_map(fine, fe);
    for (size_t p = 0; p < tq.w.size(); ++p) {
      Vec2 x = fmap.to_physical(tq.x[p], tq.y[p]);
      double val = eval(v, fe, tq.x[p], tq.y[p]).value;
      double cu, cv;
      cmaps[ce].to_reference(x, cu, cv);
      double w = tq.w[p] * fmap.det;
      for (int y = 0; y < nloc; ++y) rhs[ce][y] += w * val * rb.value(y, cu, cv);
    }
  }
  const auto& mi = rb.mass_inv();
  std::vector<std::vector<double>> moments(coarse.n_elements(),
                                           std::vector<double>(nloc, 0.0));
  for (int e = 0; e < coarse.n_elements(); ++e)
    for (int a = 0; a < nloc; ++a) {
      double c = 0;
      for (int y = 0; y < nloc; ++y)
        c += mi[(size_t)a * nloc + y] * rhs[e][y] / cmaps[e].det;
      moments[e][a] = c;
    }
  return moments;
}

}  // namespace

Field quasi_interp(const MeshForest& forest, int k, int l, const Field& v) {
  if (l < k) throw std::runtime_error("quasi_interp requires l >= k");
  int r = v.space->degree();
  auto coarse_space = std::make_shared<DGSpace>(forest.mesh_ptr(k), r);
  NodeClassification nc = classify_nodes(forest, k, r);
  auto moments = coarse_dual_moments(forest, k, l, v, *coarse_space);

  const Mesh& coarse = forest.mesh(k);
  int nloc = coarse_space->local_size();
  Field out = make_field(coarse_space);
  // patch measures per node
  std::vector<double> omega(nc.table.n_nodes, 0.0);
  for (int z = 0; z < nc.table.n_nodes; ++z)
    for (auto [e, a] : nc.table.incidence[z]) omega[z] += coarse.area(e);

  for (int e = 0; e < coarse.n_elements(); ++e) {
    for (int a = 0; a < nloc; ++a) {
      int z = nc.table.node_of[(size_t)e * nloc + a];
      double val;
      if (nc.near_plusplus[z]) {
        val = moments[e][a];  // element-wise dual moment (may jump across faces)
      } else if (nc.table.boundary[z]) {
        val = 0.0;
      } else {
        val = 0.0;
        for (auto [e2, a2] : nc.table.incidence[z])
          val += coarse.area(e2) / omega[z] * moments[e2][a2];
      }
      out.coeffs[(size_t)e * nloc + a] = val;
    }
  }
  return out;
}

PoincarePair poincare_check(const MeshForest& forest, int k, int element, int l,
                            const Field& v) {
  const Mesh& coarse = forest.mesh(k);
  const Mesh& fine = forest.mesh(l);
  const DGSpace& fsp = *v.space;
  std::vector<int> anc = forest.ancestor_map(k, l);
  std::vector<int> patch = coarse.neighborhood(element);
  std::vector<char> in_patch(coarse.n_elements(), 0);
  for (int e : patch) in_patch[e] = 1;

  const QuadRule& tq = triangle_rule(2 * fsp.degree() + 2);
  // patch mean
  double vol = 0, mean = 0;
  for (int fe = 0; fe < fine.n_elements(); ++fe) {
    if (!in_patch[anc[fe]]) continue;
    AffineMap fmap = affine_map(fine, fe);
    for (size_t p = 0; p < tq.w.size(); ++p) {
      double w = tq.w[p] * fmap.det;
      vol += w;
      mean += w * eval(v, fe, tq.x[p], tq.y[p]).value;
    }
  }
  mean /= vol;

  PoincarePair out;
  for (int fe = 0; fe < fine.n_elements(); ++fe) {
    if (!in_patch[anc[fe]]) continue;
    AffineMap fmap = affine_map(fine, fe);
    double hk = coarse.h_element(anc[fe]);
    for (size_t p = 0; p < tq.w.size(); ++p) {
      double w = tq.w[p] * fmap.det;
      EvalResult ev = eval(v, fe, tq.x[p], tq.y[p]);
      double d = ev.value - mean;
      out.lhs += w * d * d;
      out.rhs += w * hk * hk * dot(ev.gradient, ev.gradient);
    }
  }
  // jump terms over fine faces inside the patch
  const QuadRule& eq = edge_rule(2 * fsp.degree() + 2);
  for (int fi = 0; fi < fine.n_faces(); ++fi) {
    const Face& face = fine.faces[fi];
    if (!in_patch[anc[face.elems[0]]]) continue;
    if (!face.boundary() && !in_patch[anc[face.elems[1]]]) continue;
    double hs = fine.h_face(fi);
    double hk = coarse.h_element(anc[face.elems[0]]);
    Vec2 p0 = fine.point(face.v[0]), p1 = fine.point(face.v[1]);
    int ns = face.boundary() ? 1 : 2;
    AffineMap maps[2];
    for (int s = 0; s < ns; ++s) maps[s] = affine_map(fine, face.elems[s]);
    double j2 = 0;
    for (size_t p = 0; p < eq.w.size(); ++p) {
      Vec2 x = p0 + eq.x[p] * (p1 - p0);
      double u0, v0;
      maps[0].to_reference(x, u0, v0);
      double j = eval(v, face.elems[0], u0, v0).value;
      if (ns == 2) {
        double u1, v1;
        maps[1].to_reference(x, u1, v1);
        j -= eval(v, face.elems[1], u1, v1).value;
      }
      j2 += eq.w[p] * hs * j * j;
    }
    out.rhs += hk * hk / hs * j2;
  }
  return out;
}

}  // namespace adgm
