#include "adgm/analysis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <set>
#include <stdexcept>

namespace adgm {

namespace {

std::array<int, 3> sorted_key(std::array<int, 3> t) {
  std::sort(t.begin(), t.end());
  return t;
}

}  // namespace

SequenceClassification classify(const MeshForest& forest) {
  if (forest.size() < 1) throw std::runtime_error("empty forest");
  const Mesh& final_mesh = forest.last();
  std::set<std::array<int, 3>> final_keys;
  for (const Element& e : final_mesh.elements) final_keys.insert(sorted_key(e.v));

  SequenceClassification out;
  for (int k = 0; k < forest.size(); ++k) {
    const Mesh& mesh = forest.mesh(k);
    int ne = mesh.n_elements();
    SequenceClassification::Level lv;
    lv.plus.assign(ne, 0);
    lv.plusplus.assign(ne, 0);
    lv.plus3.assign(ne, 0);
    for (int e = 0; e < ne; ++e)
      lv.plus[e] = final_keys.count(sorted_key(mesh.elements[e].v)) ? 1 : 0;
    for (int e = 0; e < ne; ++e) {
      bool all = true;
      for (int n : mesh.neighborhood(e)) all = all && lv.plus[n];
      lv.plusplus[e] = all ? 1 : 0;
    }
    for (int e = 0; e < ne; ++e) {
      bool all = true;
      for (int n : mesh.neighborhood(e)) all = all && lv.plusplus[n];
      lv.plus3[e] = all ? 1 : 0;
    }
    for (int e = 0; e < ne; ++e) {
      if (!lv.plusplus[e]) {
        lv.omega_minus_area += mesh.area(e);
        lv.max_h_omega_minus = std::max(lv.max_h_omega_minus, mesh.h_element(e));
      }
    }
    out.levels.push_back(std::move(lv));
  }
  return out;
}

StabilizationResult stabilization_check(const MeshForest& forest, int element_in_final) {
  const Mesh& final_mesh = forest.last();
  if (element_in_final < 0 || element_in_final >= final_mesh.n_elements())
    throw std::runtime_error("element not in final mesh");
  auto key = sorted_key(final_mesh.elements[element_in_final].v);

  // neighborhood of the element (as vertex-triple keys) in each mesh where it exists
  std::vector<std::set<std::array<int, 3>>> hoods;
  std::vector<int> level_of;
  for (int k = 0; k < forest.size(); ++k) {
    const Mesh& mesh = forest.mesh(k);
    int idx = -1;
    for (int e = 0; e < mesh.n_elements(); ++e)
      if (sorted_key(mesh.elements[e].v) == key) {
        idx = e;
        break;
      }
    if (idx < 0) continue;
    std::set<std::array<int, 3>> hood;
    for (int n : mesh.neighborhood(idx)) hood.insert(sorted_key(mesh.elements[n].v));
    hoods.push_back(std::move(hood));
    level_of.push_back(k);
  }

  StabilizationResult res;
  int m = (int)hoods.size();
  int first = m - 1;
  while (first > 0 && hoods[first - 1] == hoods[m - 1]) --first;
  res.first_stable_index = level_of[first];
  res.stabilized = m >= 2 ? hoods[m - 2] == hoods[m - 1] : true;
  return res;
}

void write_classification_csv(std::ostream& out, const MeshForest& forest,
                              const SequenceClassification& cls) {
  out << "k,n_elem,n_plus,n_plusplus,n_plus3,omega_minus_area,max_h_omega_minus\n";
  for (size_t k = 0; k < cls.levels.size(); ++k) {
    const auto& lv = cls.levels[k];
    auto count = [](const std::vector<char>& v) {
      long c = 0;
      for (char x : v) c += x;
      return c;
    };
    char buf[160];
    std::snprintf(buf, sizeof buf, "%zu,%d,%ld,%ld,%ld,%.12g,%.12g\n", k,
                  forest.mesh((int)k).n_elements(), count(lv.plus), count(lv.plusplus),
                  count(lv.plus3), lv.omega_minus_area, lv.max_h_omega_minus);
    out << buf;
  }
}

}  // namespace adgm
