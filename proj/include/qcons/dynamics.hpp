#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "qcons/graph.hpp"
#include "qcons/numeric.hpp"
#include "qcons/quantizer.hpp"
#include "qcons/weights.hpp"

namespace qcons {

using State = std::vector<Rational>;

Rational state_sum(std::span<const Rational> x);
/// Exact x_ave = (1/n) sum x_i.
Rational state_average(std::span<const Rational> x);
std::size_t hash_state(std::span<const Rational> x) noexcept;

/// Quantized update x(k+1) = W Q(x(k)) + x(k) - Q(x(k)).
///
/// Each row is stored over a common integer denominator B_i so one update is
/// integer multiply-adds followed by a single rational addition per node.
class StepEngine {
 public:
  explicit StepEngine(const WeightMatrix& w);

  int size() const noexcept { return static_cast<int>(rows_.size()); }
  /// Common denominator of row i (LCM of its coefficient denominators).
  const Integer& row_denominator(NodeId i) const { return rows_.at(i).denominator; }

  /// One update given the quantizer indices Q(x_j) = step * index_j.
  void advance(State& x, std::span<const Integer> index, const Rational& step) const;
  State step(const State& x, Quantizer& q) const;

 private:
  struct Row {
    Integer denominator;
    std::vector<std::pair<NodeId, Integer>> coefficients;  // (W - I)_ij * denominator
  };
  std::vector<Row> rows_;
};

State step(const WeightMatrix& w, Quantizer& q, const State& x);

/// x_i(k+1) = w_ii x_i(k) + sum_{j != i} w_ij Q(x_j(k)): the variant that
/// does not conserve the average.
State naive_quantized_step(const WeightMatrix& w, Quantizer& q, const State& x);

struct QuantizedConsensus {
  std::uint64_t k0 = 0;
  Rational level;  // common quantized value
};
struct Cycle {
  std::uint64_t t_conv = 0;
  std::uint64_t period = 0;
};
struct Undecided {
  std::uint64_t iterations = 0;
};
using Verdict = std::variant<QuantizedConsensus, Cycle, Undecided>;

std::string verdict_kind(const Verdict& v);
/// k0 for consensus, t_conv for a cycle, the budget for Undecided.
std::uint64_t terminal_time(const Verdict& v);
bool is_decided(const Verdict& v);

struct RecordPolicy {
  enum class Mode { Full, EveryKth, None };
  Mode mode = Mode::Full;
  std::uint64_t stride = 1;

  static RecordPolicy full() { return {}; }
  static RecordPolicy every(std::uint64_t k) { return {Mode::EveryKth, k}; }
  static RecordPolicy none() { return {Mode::None, 1}; }
};

inline constexpr std::uint64_t kDefaultMaxIters = 1'000'000;

using StateObserver = std::function<void(std::uint64_t k, const State& x)>;

struct SimOptions {
  std::uint64_t max_iters = kDefaultMaxIters;
  RecordPolicy record;
  /// Run even when the weights fail validate_assumption1.
  bool force = false;
  /// Called for every computed state, k = 0..last_k, in order.
  StateObserver observer;
};

struct Snapshot {
  std::uint64_t k = 0;
  State x;
};

struct Trace {
  std::vector<Snapshot> states;
  Verdict verdict;
  std::uint64_t last_k = 0;
  /// x(t_conv) .. x(t_conv + P - 1) for a cycle, the fixed point for consensus.
  std::vector<State> terminal;
  State initial;
  QuantizerKind quantizer;
  bool assumption_satisfied = false;
};

/// Iterates the quantized system until quantized consensus, an exact state
/// repeat, or max_iters updates. Throws AssumptionViolated when the weights
/// fail the check and force is off, and InternalInconsistency if a
/// column-stochastic W ever changes the state sum.
Trace simulate(const Graph& g, const WeightMatrix& w, const QuantizerKind& q, State x0,
               const SimOptions& options = {});

/// Classifies a recorded contiguous state sequence after the fact.
Verdict infer_verdict(std::span<const State> states, const QuantizerKind& q);

/// Unquantized x(k+1) = W x(k); returns x(0) .. x(iters).
std::vector<State> simulate_linear(const WeightMatrix& w, const State& x0, std::uint64_t iters);
std::vector<std::vector<double>> simulate_linear_approx(const WeightMatrix& w, const std::vector<double>& x0,
                                                        std::uint64_t iters);

}  // namespace qcons
