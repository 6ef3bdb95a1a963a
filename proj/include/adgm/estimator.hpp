#pragma once

#include <vector>

#include "adgm/forms.hpp"

namespace adgm {

/// Per-element residual indicators E_G(E) with component breakdown and data
/// oscillation.
struct IndicatorField {
  std::vector<double> total2;     // E_G(E)^2
  std::vector<double> residual2;  // int_E h^2 |f + Lap v|^2
  std::vector<double> gradjump2;  // int_{dE cap Omega} h [grad v]^2
  std::vector<double> penalty2;   // sigma int_dE h^{-1} [v]^2
  std::vector<double> osc2;       // osc(E,f)^2
};

/// Residual indicators for a discrete field v; boundary jumps are adjusted by
/// the Dirichlet data g when present.
IndicatorField indicators(const Field& v, const SchemeParams& params, const ScalarFn& f,
                          const ScalarFn& g = nullptr);

/// osc(E,f) = inf_{p in P_{r-1}(E)} || h (f - p) ||_E via local L2 projection.
double oscillation(const DGSpace& space, const ScalarFn& f, int element);

/// E_G(M) = (sum_{E in M} E_G(E)^2)^{1/2}.
double total(const IndicatorField& ind, const std::vector<int>& subset);
double total(const IndicatorField& ind);

}  // namespace adgm
