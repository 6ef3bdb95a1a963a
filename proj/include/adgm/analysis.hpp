#pragma once

#include <vector>

#include "adgm/mesh.hpp"

namespace adgm {

/// Finite-sequence surrogate of the survivor sets: an element of G_k counts
/// as surviving if it is still an element of the final recorded mesh.
struct SequenceClassification {
  struct Level {
    std::vector<char> plus;      // G_k^+ membership per element
    std::vector<char> plusplus;  // G_k^{++}
    std::vector<char> plus3;     // G_k^{3+}
    double omega_minus_area = 0;       // |Omega_k^-|, Omega_k^- from G_k \ G_k^{++}
    double max_h_omega_minus = 0;      // ||h_k chi_{Omega_k^-}||_inf
  };
  std::vector<Level> levels;
};

SequenceClassification classify(const MeshForest& forest);

struct StabilizationResult {
  int first_stable_index = -1;  // smallest recorded K(E)
  bool stabilized = false;      // neighborhood unchanged over the last two meshes
};

/// For an element of the final mesh: the first index from which its recorded
/// neighborhood N_k(E) stays constant.
StabilizationResult stabilization_check(const MeshForest& forest, int element_in_final);

void write_classification_csv(std::ostream& out, const MeshForest& forest,
                              const SequenceClassification& cls);

}  // namespace adgm
