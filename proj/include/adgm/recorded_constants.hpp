#pragma once

// Empirical constants measured once with tools/calibrate and frozen here.
// The verify suites re-measure them and fail if the fresh value drifts by
// more than 10% — a regression lock, not a theoretical bound.

namespace adgm::recorded {

// Minimum of B(v,v) / |||v|||^2 over 100 seeded random fields (unit square,
// two uniform refinements).
inline constexpr double coercivity_sipg_r1 = 0.787989525;
inline constexpr double coercivity_sipg_r2 = 0.844204005;
inline constexpr double coercivity_nipg_r1 = 1.0;
inline constexpr double coercivity_ldg_r1 = 1.84265689;
inline constexpr double coercivity_ldg_lifted_r1 = 4.37628799;

// max ||r_S(jump w)||_L2 / (h_S^{-1/2} ||jump w||_S) over the sampled fields.
inline constexpr double lifting_r_stability = 2.44937465;
// Same ratio for l_S(beta . jump w) with beta = (0.5, 0.5).
inline constexpr double lifting_l_stability = 3.46393884;

// max energy-norm ratio |||Pi_k v||| / |||v||| over the sampled fine fields
// of the interp suite (quasi-interpolation stability).
inline constexpr double quasi_interp_stability = 0.751733235;

// max elementwise ratio of the averaging estimate
// (h^{-1}||v - I_G v||^2 + ||grad(v - I_G v)||^2) / (h^{-1} jump^2).
inline constexpr double averaging_stability = 10.6555772;

// max lhs/rhs of the patch Poincare inequality over the interp suite.
inline constexpr double poincare_envelope = 0.289641076;

}  // namespace adgm::recorded
