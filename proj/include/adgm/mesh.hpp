#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace adgm {

struct Vec2 {
  double x = 0, y = 0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::sqrt(a.x * a.x + a.y * a.y); }

struct Vertex {
  Vec2 pos;
  bool boundary = false;
};

/// Triangle with newest-vertex-bisection bookkeeping.
/// v[0] is the peak (newest vertex); the refinement edge is (v[1], v[2]).
struct Element {
  std::array<int, 3> v{};
  int generation = 0;
  std::int64_t record = -1;  // index into the forest registry, -1 if detached
};

/// Edge key independent of orientation.
using EdgeKey = std::pair<int, int>;
inline EdgeKey edge_key(int a, int b) { return a < b ? EdgeKey{a, b} : EdgeKey{b, a}; }

struct Face {
  std::array<int, 2> v{};      // endpoint vertex ids
  std::array<int, 2> elems{-1, -1};  // adjacent elements; elems[0] owns n+ (smaller id)
  std::array<int, 2> local_edge{-1, -1};
  bool boundary() const { return elems[1] < 0; }
};

class Mesh {
public:
  std::vector<Vertex> vertices;
  std::vector<Element> elements;
  std::vector<Face> faces;
  std::vector<std::array<int, 3>> element_faces;  // face id per local edge (edge i opposite v[i])

  int n_vertices() const { return (int)vertices.size(); }
  int n_elements() const { return (int)elements.size(); }
  int n_faces() const { return (int)faces.size(); }

  Vec2 point(int vid) const { return vertices[vid].pos; }
  Vec2 corner(int e, int local) const { return vertices[elements[e].v[local]].pos; }

  double area(int e) const;
  double total_area() const;
  double h_element(int e) const;   // |E|^{1/2}
  double h_face(int f) const;      // face length
  Vec2 centroid(int e) const;
  /// Outward unit normal of face f as seen from its owner element (n+).
  Vec2 face_normal(int f) const;

  /// Elements sharing at least one vertex with e, including e itself. Sorted.
  std::vector<int> neighborhood(int e) const;
  /// Minimum interior angle over all elements, in radians.
  double min_angle() const;

  /// Local edge i of element e, endpoints ordered (v[(i+1)%3], v[(i+2)%3]).
  EdgeKey element_edge(int e, int i) const;

  void build_faces();          // also builds vertex->element adjacency
  void check_invariants() const;  // conformity, orientation, covering

  const std::vector<std::vector<int>>& vertex_elements() const { return vtx_elems_; }

private:
  std::vector<std::vector<int>> vtx_elems_;
};

/// Construct a conforming mesh. `refinement_edges[t]` is the local index of the
/// refinement edge of triangle t (the edge opposite that vertex, which becomes
/// the peak). Verifies conformity, orientation and the NVB matching condition.
Mesh build_initial(const std::vector<Vec2>& vertices,
                   const std::vector<std::array<int, 3>>& triangles,
                   const std::vector<int>& refinement_edges,
                   bool require_matching = true);

struct BisectResult {
  std::array<int, 3> child_a;  // (midpoint, v0, v1)
  std::array<int, 3> child_b;  // (midpoint, v2, v0)
  Vec2 midpoint;
};

/// Children of one newest-vertex bisection; pure, does not touch the mesh.
BisectResult bisect(const Mesh& mesh, int element);

/// Records one element per bisection event across the whole forest.
struct ElementRecord {
  std::array<int, 3> key;  // sorted vertex triple
  std::int64_t parent = -1;
  int generation = 0;
};

/// A nested sequence G_0 subset G_1 subset ... produced by refine().
class MeshForest {
public:
  explicit MeshForest(Mesh initial);

  /// Appends REFINE(last mesh, marked) and returns it. Marked elements are
  /// bisected, then conformity is restored by iterated closure bisections.
  const Mesh& refine(const std::set<int>& marked);

  /// Load a recorded sequence of meshes (consistent global vertex numbering).
  /// Ancestor links are reconstructed geometrically.
  static MeshForest from_meshes(std::vector<Mesh> meshes);

  int size() const { return (int)meshes_.size(); }
  const Mesh& mesh(int k) const { return *meshes_[k]; }
  std::shared_ptr<const Mesh> mesh_ptr(int k) const { return meshes_[k]; }
  const Mesh& last() const { return *meshes_.back(); }

  const std::vector<ElementRecord>& registry() const { return registry_; }
  /// Registry id for a sorted vertex triple, or -1.
  std::int64_t find_record(const std::array<int, 3>& key) const;

  /// True if registry element `rec` is `ancestor` or descends from it.
  bool descends_from(std::int64_t rec, std::int64_t ancestor) const;

  /// For each element of mesh(l), the index of the element of mesh(k)
  /// containing it (k <= l).
  std::vector<int> ancestor_map(int k, int l) const;

private:
  MeshForest() = default;
  std::int64_t register_element(const std::array<int, 3>& tri, std::int64_t parent, int gen);
  int edge_midpoint(std::vector<Vertex>& verts, EdgeKey e);

  std::vector<std::shared_ptr<const Mesh>> meshes_;
  std::vector<ElementRecord> registry_;
  std::map<std::array<int, 3>, std::int64_t> key_to_record_;
  std::map<EdgeKey, int> midpoints_;
  std::set<EdgeKey> boundary_edges_;
};

/// Built-in initial meshes.
Mesh make_unit_square();
Mesh make_l_shape();
Mesh make_domain(const std::string& name);  // "unit-square", "l-shape", "file:<path>"

/// Line-oriented text format: "dgmesh 1", then "v x y", then "t v0 v1 v2 e".
Mesh read_mesh(std::istream& in, bool require_matching = true);
void write_mesh(std::ostream& out, const Mesh& mesh);
Mesh read_mesh_file(const std::string& path, bool require_matching = true);
void write_mesh_file(const std::string& path, const Mesh& mesh);

}  // namespace adgm
