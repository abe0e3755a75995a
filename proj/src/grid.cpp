#include "qcons/grid.hpp"

#include <optional>
#include <string>

#include "qcons/error.hpp"

namespace qcons {

namespace {

std::vector<Rational> row_values(const WeightMatrix& w, NodeId i) {
  std::vector<Rational> out;
  for (const auto& e : w.row(i)) out.push_back(e.value);
  return out;
}

struct GammaParts {
  std::vector<Integer> B;
  std::vector<Integer> D;
  Rational gamma;
};

GammaParts gamma_parts(const WeightMatrix& w, std::span<const Rational> decimals) {
  const int n = w.size();
  if (static_cast<int>(decimals.size()) != n) {
    throw Error(ErrorCode::InvalidArgument, "decimal vector dimension does not match the weight matrix");
  }
  GammaParts out;
  std::optional<Rational> bound;
  const Rational half(1, 2);
  for (int i = 0; i < n; ++i) {
    const auto row = row_values(w, i);
    Integer B;
    try {
      B = lcm_denominators(row);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::EmptyNeighborhood) {
        throw Error(ErrorCode::EmptyNeighborhood, "node " + std::to_string(i) + " has no neighbour weights");
      }
      throw;
    }
    const Rational slack = half - w.off_diagonal_sum(i);
    if (slack.sign() <= 0 || w.diag(i) <= half) {
      throw Error(ErrorCode::AssumptionViolated,
                  "node " + std::to_string(i) + ": off-diagonal mass " + w.off_diagonal_sum(i).str() +
                      " leaves no room for a positive gamma");
    }
    const Integer D = lcm(B, decimals[i].den());
    const Rational grid_gap(Integer(1), D);
    const Rational local = min(grid_gap, slack);
    bound = bound ? min(*bound, local) : local;
    out.B.push_back(B);
    out.D.push_back(D);
  }
  out.gamma = *bound / Rational(2);
  return out;
}

}  // namespace

Rational GridConstants::alpha_max() const {
  if (alpha.empty()) throw Error(ErrorCode::InvalidArgument, "no alpha values");
  Rational m = alpha.front();
  for (const auto& a : alpha) m = max(m, a);
  return m;
}

Rational compute_gamma(const WeightMatrix& w, std::span<const Rational> initial_decimals) {
  return gamma_parts(w, initial_decimals).gamma;
}

GridConstants compute_grid_constants(const WeightMatrix& w, std::span<const Rational> x0) {
  std::vector<Rational> decimals;
  decimals.reserve(x0.size());
  for (const auto& v : x0) decimals.push_back(v.frac());
  GammaParts parts = gamma_parts(w, decimals);

  GridConstants g;
  g.B = std::move(parts.B);
  g.D = std::move(parts.D);
  g.gamma = parts.gamma;
  std::optional<Rational> delta;
  for (int i = 0; i < w.size(); ++i) {
    for (const auto& e : w.row(i)) delta = delta ? min(*delta, e.value) : e.value;
    g.alpha.push_back(Rational(1) - w.diag(i) + g.gamma);
  }
  g.delta = *delta;
  return g;
}

}  // namespace qcons
