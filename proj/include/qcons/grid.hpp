#pragma once

#include <span>
#include <vector>

#include "qcons/numeric.hpp"
#include "qcons/weights.hpp"

namespace qcons {

/// Constants of the decimal grid on which a truncation-system trajectory lives.
///
/// Every decimal c_i(k) = x_i(k) - floor(x_i(k)) stays on c_i(0) + (1/B_i) Z,
/// hence on the (1/D_i) Z grid with D_i = lcm(B_i, den c_i(0)). Two distinct
/// grid points are at least 1/D_i apart, which is what makes gamma positive.
struct GridConstants {
  std::vector<Integer> B;        // LCM of the off-diagonal weight denominators of row i
  std::vector<Integer> D;        // lcm(B_i, denominator of c_i(0))
  Rational gamma;
  Rational delta;                // smallest non-zero off-diagonal weight
  std::vector<Rational> alpha;   // 1 - w_ii + gamma

  Rational alpha_max() const;
  /// min(gamma, delta): the guaranteed Lyapunov decrease per situation.
  Rational beta() const { return min(gamma, delta); }
};

/// gamma = 1/2 * min( min_i 1/D_i, min_i (1/2 - sum_{j != i} w_ij) ).
///
/// AssumptionViolated when some row has off-diagonal mass >= 1/2 (equivalently
/// w_ii <= 1/2 for a stochastic row); EmptyNeighborhood for a row with no
/// off-diagonal weights.
Rational compute_gamma(const WeightMatrix& w, std::span<const Rational> initial_decimals);

/// All constants for a run starting at x0 (given in the truncation frame).
GridConstants compute_grid_constants(const WeightMatrix& w, std::span<const Rational> x0);

}  // namespace qcons
