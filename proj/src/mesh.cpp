#include "adgm/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace adgm {

namespace {

std::array<int, 3> sorted_key(std::array<int, 3> t) {
  std::sort(t.begin(), t.end());
  return t;
}

double triangle_area(Vec2 a, Vec2 b, Vec2 c) { return 0.5 * cross(b - a, c - a); }

// Longest edge, ties broken by smallest opposite-vertex id.
std::vector<int> longest_edge_assignment(const std::vector<Vec2>& v,
                                         const std::vector<std::array<int, 3>>& tris) {
  std::vector<int> re;
  re.reserve(tris.size());
  for (const auto& tri : tris) {
    int best = -1;
    double best_len = -1;
    for (int i = 0; i < 3; ++i) {
      double l = norm(v[tri[(i + 1) % 3]] - v[tri[(i + 2) % 3]]);
      if (l > best_len + 1e-14) {
        best_len = l;
        best = i;
      } else if (l > best_len - 1e-14 && best >= 0 && tri[i] < tri[best]) {
        best = i;
      }
    }
    re.push_back(best);
  }
  return re;
}

}  // namespace

double Mesh::area(int e) const {
  return triangle_area(corner(e, 0), corner(e, 1), corner(e, 2));
}

double Mesh::total_area() const {
  double s = 0;
  for (int e = 0; e < n_elements(); ++e) s += area(e);
  return s;
}

double Mesh::h_element(int e) const { return std::sqrt(area(e)); }

double Mesh::h_face(int f) const {
  return norm(point(faces[f].v[1]) - point(faces[f].v[0]));
}

Vec2 Mesh::centroid(int e) const {
  return (1.0 / 3.0) * (corner(e, 0) + corner(e, 1) + corner(e, 2));
}

Vec2 Mesh::face_normal(int f) const {
  const Face& face = faces[f];
  Vec2 t = point(face.v[1]) - point(face.v[0]);
  Vec2 n{t.y, -t.x};
  n = (1.0 / norm(n)) * n;
  // orient outward from the owner element
  Vec2 c = centroid(face.elems[0]);
  Vec2 m = 0.5 * (point(face.v[0]) + point(face.v[1]));
  if (dot(n, m - c) < 0) n = -1.0 * n;
  return n;
}

EdgeKey Mesh::element_edge(int e, int i) const {
  const auto& v = elements[e].v;
  return edge_key(v[(i + 1) % 3], v[(i + 2) % 3]);
}

std::vector<int> Mesh::neighborhood(int e) const {
  std::set<int> out;
  for (int vid : elements[e].v)
    for (int e2 : vtx_elems_[vid]) out.insert(e2);
  return {out.begin(), out.end()};
}

double Mesh::min_angle() const {
  double best = 4.0;
  for (int e = 0; e < n_elements(); ++e) {
    for (int i = 0; i < 3; ++i) {
      Vec2 a = corner(e, i), b = corner(e, (i + 1) % 3), c = corner(e, (i + 2) % 3);
      Vec2 u = b - a, w = c - a;
      double ang = std::atan2(std::abs(cross(u, w)), dot(u, w));
      best = std::min(best, ang);
    }
  }
  return best;
}

void Mesh::build_faces() {
  faces.clear();
  element_faces.assign(n_elements(), {-1, -1, -1});
  std::map<EdgeKey, int> face_of;
  for (int e = 0; e < n_elements(); ++e) {
    for (int i = 0; i < 3; ++i) {
      EdgeKey k = element_edge(e, i);
      auto it = face_of.find(k);
      if (it == face_of.end()) {
        Face f;
        f.v = {k.first, k.second};
        f.elems = {e, -1};
        f.local_edge = {i, -1};
        face_of.emplace(k, (int)faces.size());
        element_faces[e][i] = (int)faces.size();
        faces.push_back(f);
      } else {
        Face& f = faces[it->second];
        if (f.elems[1] >= 0)
          throw std::runtime_error("non-conforming mesh: edge shared by >2 elements");
        f.elems[1] = e;
        f.local_edge[1] = i;
        element_faces[e][i] = it->second;
      }
    }
  }
  // n+ owner: the adjacent element with smaller id
  for (Face& f : faces) {
    if (!f.boundary() && f.elems[0] > f.elems[1]) {
      std::swap(f.elems[0], f.elems[1]);
      std::swap(f.local_edge[0], f.local_edge[1]);
    }
  }
  vtx_elems_.assign(n_vertices(), {});
  for (int e = 0; e < n_elements(); ++e)
    for (int vid : elements[e].v) vtx_elems_[vid].push_back(e);
}

void Mesh::check_invariants() const {
  for (int e = 0; e < n_elements(); ++e) {
    const auto& v = elements[e].v;
    if (v[0] == v[1] || v[1] == v[2] || v[0] == v[2])
      throw std::runtime_error("duplicated vertex in element");
    if (area(e) <= 0) throw std::runtime_error("inverted or degenerate element");
  }
  for (const Face& f : faces) {
    if (f.elems[0] < 0) throw std::runtime_error("face without adjacent element");
  }
}

Mesh build_initial(const std::vector<Vec2>& vertices,
                   const std::vector<std::array<int, 3>>& triangles,
                   const std::vector<int>& refinement_edges, bool require_matching) {
  if (triangles.size() != refinement_edges.size())
    throw std::runtime_error("refinement edge list size mismatch");
  Mesh mesh;
  mesh.vertices.resize(vertices.size());
  for (size_t i = 0; i < vertices.size(); ++i) mesh.vertices[i].pos = vertices[i];
  mesh.elements.resize(triangles.size());
  for (size_t t = 0; t < triangles.size(); ++t) {
    int e = refinement_edges[t];
    if (e < 0 || e > 2) throw std::runtime_error("refinement edge index out of range");
    std::array<int, 3> tri = triangles[t];
    for (int vid : tri)
      if (vid < 0 || vid >= (int)vertices.size())
        throw std::runtime_error("vertex id out of range");
    // rotate so the peak (vertex opposite the refinement edge) is first
    std::array<int, 3> v = {tri[e], tri[(e + 1) % 3], tri[(e + 2) % 3]};
    if (v[0] == v[1] || v[1] == v[2] || v[0] == v[2])
      throw std::runtime_error("duplicated vertex in element");
    double a = triangle_area(vertices[v[0]], vertices[v[1]], vertices[v[2]]);
    if (a == 0) throw std::runtime_error("degenerate triangle");
    if (a < 0) std::swap(v[1], v[2]);  // normalize orientation, peak stays first
    mesh.elements[t].v = v;
    mesh.elements[t].generation = 0;
  }
  mesh.build_faces();
  mesh.check_invariants();
  // boundary flags
  for (const Face& f : mesh.faces)
    if (f.boundary())
      for (int vid : f.v) mesh.vertices[vid].boundary = true;
  // NVB matching condition: an interior refinement edge must be the refinement
  // edge of both adjacent elements.
  for (const Face& f : mesh.faces) {
    if (!require_matching || f.boundary()) continue;
    bool r0 = f.local_edge[0] == 0;
    bool r1 = f.local_edge[1] == 0;
    if (r0 != r1)
      throw std::runtime_error("incompatible refinement-edge assignment");
  }
  return mesh;
}

BisectResult bisect(const Mesh& mesh, int element) {
  if (element < 0 || element >= mesh.n_elements())
    throw std::runtime_error("bisect: element not in mesh");
  const auto& v = mesh.elements[element].v;
  int m = mesh.n_vertices();  // id the midpoint would get
  BisectResult r;
  r.child_a = {m, v[0], v[1]};
  r.child_b = {m, v[2], v[0]};
  r.midpoint = 0.5 * (mesh.point(v[1]) + mesh.point(v[2]));
  return r;
}

MeshForest::MeshForest(Mesh initial) {
  for (Element& e : initial.elements)
    e.record = register_element(e.v, -1, e.generation);
  for (const Face& f : initial.faces)
    if (f.boundary()) boundary_edges_.insert(edge_key(f.v[0], f.v[1]));
  meshes_.push_back(std::make_shared<Mesh>(std::move(initial)));
}

std::int64_t MeshForest::register_element(const std::array<int, 3>& tri,
                                          std::int64_t parent, int gen) {
  auto key = sorted_key(tri);
  auto it = key_to_record_.find(key);
  if (it != key_to_record_.end()) return it->second;
  std::int64_t id = (std::int64_t)registry_.size();
  registry_.push_back({key, parent, gen});
  key_to_record_.emplace(key, id);
  return id;
}

int MeshForest::edge_midpoint(std::vector<Vertex>& verts, EdgeKey e) {
  auto it = midpoints_.find(e);
  if (it != midpoints_.end()) return it->second;
  int id = (int)verts.size();
  Vertex v;
  v.pos = 0.5 * (verts[e.first].pos + verts[e.second].pos);
  bool on_boundary = boundary_edges_.count(e) > 0;
  v.boundary = on_boundary;
  verts.push_back(v);
  midpoints_.emplace(e, id);
  if (on_boundary) {
    boundary_edges_.erase(e);
    boundary_edges_.insert(edge_key(e.first, id));
    boundary_edges_.insert(edge_key(e.second, id));
  }
  return id;
}

const Mesh& MeshForest::refine(const std::set<int>& marked) {
  const Mesh& old = last();
  for (int e : marked)
    if (e < 0 || e >= old.n_elements())
      throw std::runtime_error("refine: marked element not in mesh");

  if (marked.empty()) {
    meshes_.push_back(meshes_.back());
    return last();
  }

  struct Work {
    std::array<int, 3> v;
    int generation;
    std::int64_t record;
  };
  std::vector<Vertex> verts = old.vertices;
  std::vector<Work> elems;
  elems.reserve(old.n_elements() + 2 * marked.size());
  for (const Element& e : old.elements) elems.push_back({e.v, e.generation, e.record});

  std::set<EdgeKey> split_now;  // edges split during this call
  std::vector<char> must_bisect(elems.size(), 0);
  for (int e : marked) must_bisect[e] = 1;

  const std::int64_t budget = 3 * (std::int64_t)old.n_elements() + 3 * (std::int64_t)marked.size();
  std::int64_t bisections = 0;

  bool again = true;
  while (again) {
    again = false;
    std::vector<Work> next;
    std::vector<char> next_must;
    next.reserve(elems.size());
    for (size_t i = 0; i < elems.size(); ++i) {
      const Work& w = elems[i];
      bool hanging = false;
      for (int k = 0; k < 3 && !hanging; ++k)
        hanging = split_now.count(edge_key(w.v[(k + 1) % 3], w.v[(k + 2) % 3])) > 0;
      if (!must_bisect[i] && !hanging) {
        next.push_back(w);
        next_must.push_back(0);
        continue;
      }
      if (++bisections > budget)
        throw std::runtime_error("refinement closure exceeded budget (invalid G_0 matching?)");
      EdgeKey re = edge_key(w.v[1], w.v[2]);
      int m = edge_midpoint(verts, re);
      split_now.insert(re);
      int gen = w.generation + 1;
      std::array<int, 3> ca = {m, w.v[0], w.v[1]};
      std::array<int, 3> cb = {m, w.v[2], w.v[0]};
      next.push_back({ca, gen, register_element(ca, w.record, gen)});
      next_must.push_back(0);
      next.push_back({cb, gen, register_element(cb, w.record, gen)});
      next_must.push_back(0);
      again = true;
    }
    elems.swap(next);
    must_bisect.swap(next_must);
    if (again) {
      // another sweep only if some surviving element still has a split edge
      bool pending = false;
      for (const Work& w : elems) {
        for (int k = 0; k < 3 && !pending; ++k)
          pending = split_now.count(edge_key(w.v[(k + 1) % 3], w.v[(k + 2) % 3])) > 0;
        if (pending) break;
      }
      again = pending;
    }
  }

  auto mesh = std::make_shared<Mesh>();
  mesh->vertices = std::move(verts);
  mesh->elements.resize(elems.size());
  for (size_t i = 0; i < elems.size(); ++i) {
    mesh->elements[i].v = elems[i].v;
    mesh->elements[i].generation = elems[i].generation;
    mesh->elements[i].record = elems[i].record;
  }
  mesh->build_faces();
  mesh->check_invariants();
  // conformity: every single-adjacency face must lie on the domain boundary
  for (const Face& f : mesh->faces)
    if (f.boundary() && boundary_edges_.count(edge_key(f.v[0], f.v[1])) == 0)
      throw std::runtime_error("closure left a hanging node");
  // refinement contract: no marked element survives
  for (int e : marked) {
    auto key = sorted_key(old.elements[e].v);
    for (const Element& el : mesh->elements)
      if (sorted_key(el.v) == key) throw std::runtime_error("marked element not refined");
  }
  // area conservation
  double a0 = meshes_.front()->total_area();
  if (std::abs(mesh->total_area() - a0) > 1e-12 * std::abs(a0))
    throw std::runtime_error("area not conserved by refinement");
  meshes_.push_back(mesh);
  return last();
}

std::int64_t MeshForest::find_record(const std::array<int, 3>& key) const {
  auto it = key_to_record_.find(key);
  return it == key_to_record_.end() ? -1 : it->second;
}

bool MeshForest::descends_from(std::int64_t rec, std::int64_t ancestor) const {
  while (rec >= 0) {
    if (rec == ancestor) return true;
    rec = registry_[rec].parent;
  }
  return false;
}

std::vector<int> MeshForest::ancestor_map(int k, int l) const {
  const Mesh& coarse = mesh(k);
  const Mesh& fine = mesh(l);
  std::map<std::int64_t, int> coarse_of_record;
  for (int e = 0; e < coarse.n_elements(); ++e)
    coarse_of_record[coarse.elements[e].record] = e;
  std::vector<int> out(fine.n_elements(), -1);
  for (int e = 0; e < fine.n_elements(); ++e) {
    std::int64_t rec = fine.elements[e].record;
    while (rec >= 0) {
      auto it = coarse_of_record.find(rec);
      if (it != coarse_of_record.end()) {
        out[e] = it->second;
        break;
      }
      rec = registry_[rec].parent;
    }
    if (out[e] < 0) throw std::runtime_error("mesh is not a descendant of G_k");
  }
  return out;
}

MeshForest MeshForest::from_meshes(std::vector<Mesh> meshes) {
  if (meshes.empty()) throw std::runtime_error("empty mesh sequence");
  MeshForest forest;
  for (size_t k = 0; k < meshes.size(); ++k) {
    Mesh& m = meshes[k];
    if (m.faces.empty()) m.build_faces();
    if (k == 0) {
      for (Element& e : m.elements) e.record = forest.register_element(e.v, -1, 0);
      for (const Face& f : m.faces)
        if (f.boundary()) forest.boundary_edges_.insert(edge_key(f.v[0], f.v[1]));
    } else {
      const Mesh& prev = *forest.meshes_.back();
      if (m.n_vertices() < prev.n_vertices())
        throw std::runtime_error("mesh sequence not nested (vertex count decreased)");
      for (Element& e : m.elements) {
        auto key = sorted_key(e.v);
        std::int64_t rec = forest.find_record(key);
        if (rec >= 0) {
          e.record = rec;
          continue;
        }
        // new element: locate its ancestor in the previous mesh by centroid
        Vec2 c = m.centroid((int)(&e - m.elements.data()));
        std::int64_t parent = -1;
        for (int pe = 0; pe < prev.n_elements(); ++pe) {
          Vec2 a = prev.corner(pe, 0), b = prev.corner(pe, 1), d = prev.corner(pe, 2);
          double a2 = prev.area(pe);
          double l0 = triangle_area(c, b, d) / a2;
          double l1 = triangle_area(a, c, d) / a2;
          double l2 = triangle_area(a, b, c) / a2;
          if (l0 >= -1e-12 && l1 >= -1e-12 && l2 >= -1e-12) {
            parent = prev.elements[pe].record;
            break;
          }
        }
        if (parent < 0) throw std::runtime_error("mesh sequence not nested");
        e.record = forest.register_element(e.v, parent, forest.registry_[parent].generation + 1);
      }
    }
    forest.meshes_.push_back(std::make_shared<Mesh>(std::move(m)));
  }
  return forest;
}

Mesh make_unit_square() {
  std::vector<Vec2> v = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  std::vector<std::array<int, 3>> t = {{0, 1, 2}, {0, 2, 3}};
  // refinement edge = the diagonal (0,2): opposite vertex 1 in t0, vertex 3 in t1
  return build_initial(v, t, {1, 2});
}

Mesh make_l_shape() {
  // (-1,1)^2 minus [0,1]x[-1,0], fanned around the reentrant corner (0,0)
  std::vector<Vec2> v = {{0, 0},  {0, -1}, {-1, -1}, {-1, 0},
                         {-1, 1}, {0, 1},  {1, 1},   {1, 0}};
  std::vector<std::array<int, 3>> t = {{0, 1, 2}, {0, 2, 3}, {0, 3, 4},
                                       {0, 4, 5}, {0, 5, 6}, {0, 6, 7}};
  // longest edge is the diagonal from the corner in every fan triangle
  return build_initial(v, t, longest_edge_assignment(v, t));
}

Mesh make_domain(const std::string& name) {
  if (name == "unit-square") return make_unit_square();
  if (name == "l-shape") return make_l_shape();
  if (name.rfind("file:", 0) == 0) return read_mesh_file(name.substr(5));
  throw std::runtime_error("unknown domain: " + name);
}

Mesh read_mesh(std::istream& in, bool require_matching) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("dgmesh 1", 0) != 0)
    throw std::runtime_error("bad mesh header (expected 'dgmesh 1')");
  std::vector<Vec2> verts;
  std::vector<std::array<int, 3>> tris;
  std::vector<int> re;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;
    if (tag == "v") {
      Vec2 p;
      ls >> p.x >> p.y;
      verts.push_back(p);
    } else if (tag == "t") {
      std::array<int, 3> t;
      int e;
      ls >> t[0] >> t[1] >> t[2] >> e;
      tris.push_back(t);
      re.push_back(e);
    } else {
      throw std::runtime_error("bad mesh line: " + line);
    }
  }
  return build_initial(verts, tris, re, require_matching);
}

void write_mesh(std::ostream& out, const Mesh& mesh) {
  out << "dgmesh 1\n";
  char buf[80];
  for (const Vertex& v : mesh.vertices) {
    std::snprintf(buf, sizeof buf, "v %.17g %.17g\n", v.pos.x, v.pos.y);
    out << buf;
  }
  for (const Element& e : mesh.elements)
    out << "t " << e.v[0] << ' ' << e.v[1] << ' ' << e.v[2] << " 0\n";
}

Mesh read_mesh_file(const std::string& path, bool require_matching) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open mesh file: " + path);
  return read_mesh(in, require_matching);
}

void write_mesh_file(const std::string& path, const Mesh& mesh) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write mesh file: " + path);
  write_mesh(out, mesh);
}

}  // namespace adgm
