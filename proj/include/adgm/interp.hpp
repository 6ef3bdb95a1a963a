#pragma once

#include <vector>

#include "adgm/forms.hpp"
#include "adgm/mesh.hpp"
#include "adgm/space.hpp"

namespace adgm {

/// Topological identification of coincident Lagrange nodes across elements.
struct NodeTable {
  int n_nodes = 0;
  std::vector<int> node_of;  // [element * nloc + local] -> global node id
  std::vector<char> boundary;
  std::vector<std::vector<std::pair<int, int>>> incidence;  // node -> (elem, local)
};

NodeTable build_node_table(const DGSpace& space);

/// Per-node flags driving the quasi-interpolation case split on mesh G_k of a
/// forest: whether N_k(z) touches G_k^{++} (survivor surrogate), and boundary.
struct NodeClassification {
  NodeTable table;
  std::vector<char> near_plusplus;
};

NodeClassification classify_nodes(const MeshForest& forest, int k, int degree);

/// Conforming averaging I_G: nodal averaging into V_G cap H^1_0.
Field conforming_interp(const Field& v);

/// Quasi-interpolation Pi_k: maps a field on mesh G_l (l >= k) of the forest
/// into V_k. Dual moments near survivors, zero at boundary nodes, patch
/// averages elsewhere.
Field quasi_interp(const MeshForest& forest, int k, int l, const Field& v);

struct PoincarePair {
  double lhs = 0;  // ||v - v_E||^2 over the patch omega_k(E)
  double rhs = 0;  // sum h^2 |grad v|^2 + sum h^2 h_star^{-1} [v]^2
};

PoincarePair poincare_check(const MeshForest& forest, int k, int element, int l,
                            const Field& v);

}  // namespace adgm
