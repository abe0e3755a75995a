#include "qcons/dynamics.hpp"

#include <algorithm>
#include <unordered_map>

#include "qcons/error.hpp"

namespace qcons {

Rational state_sum(std::span<const Rational> x) {
  Rational s;
  for (const auto& v : x) s += v;
  return s;
}

Rational state_average(std::span<const Rational> x) {
  if (x.empty()) throw Error(ErrorCode::InvalidArgument, "average of an empty state");
  return state_sum(x) / Rational(x.size());
}

std::size_t hash_state(std::span<const Rational> x) noexcept {
  std::size_t h = 0xcbf29ce484222325ULL;
  for (const auto& v : x) h = (h ^ v.hash()) * 0x100000001b3ULL;
  return h;
}

StepEngine::StepEngine(const WeightMatrix& w) {
  const int n = w.size();
  rows_.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    std::vector<std::pair<NodeId, Rational>> coeff;
    for (const auto& e : w.row(i)) {
      if (e.col < i) coeff.emplace_back(e.col, e.value);
    }
    if (const Rational self = w.diag(i) - Rational(1); self.sign() != 0) coeff.emplace_back(i, self);
    for (const auto& e : w.row(i)) {
      if (e.col > i) coeff.emplace_back(e.col, e.value);
    }
    Integer den = 1;
    for (const auto& [j, c] : coeff) den = lcm(den, c.den());
    Row& row = rows_[i];
    row.denominator = den;
    for (const auto& [j, c] : coeff) row.coefficients.emplace_back(j, c.num() * (den / c.den()));
  }
}

void StepEngine::advance(State& x, std::span<const Integer> index, const Rational& step) const {
  if (x.size() != rows_.size() || index.size() != rows_.size()) {
    throw Error(ErrorCode::InvalidArgument, "state dimension does not match the weight matrix");
  }
  Integer acc;
  const bool unit = step == Rational(1);
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    const Row& row = rows_[i];
    acc = 0;
    for (const auto& [j, c] : row.coefficients) {
      mpz_addmul(acc.get_mpz_t(), c.get_mpz_t(), index[j].get_mpz_t());
    }
    if (acc == 0) continue;
    Rational delta(acc, row.denominator);
    if (!unit) delta *= step;
    x[i] += delta;
  }
}

State StepEngine::step(const State& x, Quantizer& q) const {
  std::vector<Integer> index;
  index.reserve(x.size());
  for (const auto& v : x) index.push_back(q.index(v));
  State out = x;
  advance(out, index, q.kind().step);
  return out;
}

State step(const WeightMatrix& w, Quantizer& q, const State& x) { return StepEngine(w).step(x, q); }

State naive_quantized_step(const WeightMatrix& w, Quantizer& q, const State& x) {
  if (static_cast<int>(x.size()) != w.size()) {
    throw Error(ErrorCode::InvalidArgument, "state dimension does not match the weight matrix");
  }
  State quantized;
  quantized.reserve(x.size());
  for (const auto& v : x) quantized.push_back(q(v));
  State out(x.size());
  for (int i = 0; i < w.size(); ++i) {
    Rational v = w.diag(i) * x[i];
    for (const auto& e : w.row(i)) v += e.value * quantized[e.col];
    out[i] = std::move(v);
  }
  return out;
}

std::string verdict_kind(const Verdict& v) {
  if (std::holds_alternative<QuantizedConsensus>(v)) return "QuantizedConsensus";
  if (std::holds_alternative<Cycle>(v)) return "Cycle";
  return "Undecided";
}

std::uint64_t terminal_time(const Verdict& v) {
  if (const auto* c = std::get_if<QuantizedConsensus>(&v)) return c->k0;
  if (const auto* c = std::get_if<Cycle>(&v)) return c->t_conv;
  return std::get<Undecided>(v).iterations;
}

bool is_decided(const Verdict& v) { return !std::holds_alternative<Undecided>(v); }

namespace {

bool all_equal(std::span<const Integer> v) {
  return std::all_of(v.begin(), v.end(), [&](const Integer& z) { return z == v.front(); });
}

/// Fixed point of the probabilistic system: every value equal and on the grid.
bool probabilistic_absorbed(std::span<const Rational> x, const Rational& step) {
  if (!std::all_of(x.begin(), x.end(), [&](const Rational& v) { return v == x.front(); })) return false;
  return (x.front() / step).is_integer();
}

/// Exact state store for one (min index, max index) epoch.
///
/// Under a row-stochastic non-negative W the minimum quantized index never
/// decreases and the maximum never increases, so a state from an earlier
/// epoch cannot recur and the store may be cleared when the pair changes.
class StateStore {
 public:
  /// Returns the iteration of an earlier identical state, or -1 after inserting.
  std::int64_t find_or_insert(std::uint64_t k, const State& x) {
    const std::size_t h = hash_state(x);
    auto& slots = index_[h];
    for (std::size_t pos : slots) {
      if (history_[pos] == x) return static_cast<std::int64_t>(base_ + pos);
    }
    if (history_.empty()) base_ = k;
    slots.push_back(history_.size());
    history_.push_back(x);
    return -1;
  }

  void clear() {
    history_.clear();
    index_.clear();
  }

  std::vector<State> slice(std::uint64_t from, std::uint64_t to) const {
    return {history_.begin() + static_cast<std::ptrdiff_t>(from - base_),
            history_.begin() + static_cast<std::ptrdiff_t>(to - base_)};
  }

 private:
  std::uint64_t base_ = 0;
  std::vector<State> history_;
  std::unordered_map<std::size_t, std::vector<std::size_t>> index_;
};

}  // namespace

Trace simulate(const Graph& g, const WeightMatrix& w, const QuantizerKind& kind, State x0,
               const SimOptions& options) {
  const int n = g.size();
  if (w.size() != n || static_cast<int>(x0.size()) != n) {
    throw Error(ErrorCode::InvalidArgument, "graph, weights and initial state dimensions differ");
  }
  const AssumptionReport report = validate_assumption1(w, g);
  if (!report.satisfied() && !options.force) {
    throw Error(ErrorCode::AssumptionViolated, report.summary());
  }
  if (options.record.mode == RecordPolicy::Mode::EveryKth && options.record.stride == 0) {
    throw Error(ErrorCode::InvalidArgument, "record stride must be positive");
  }

  Trace trace;
  trace.quantizer = kind;
  trace.assumption_satisfied = report.satisfied();
  trace.initial = x0;

  const StepEngine engine(w);
  Quantizer quantizer(kind);
  const bool deterministic = kind.deterministic();
  const bool prune = is_row_stochastic(w);
  const bool conserving = is_column_stochastic(w);
  const Rational sum0 = state_sum(x0);

  State x = std::move(x0);
  std::vector<Integer> index(static_cast<std::size_t>(n));
  StateStore store;
  Integer epoch_min;
  Integer epoch_max;

  auto record = [&](std::uint64_t k, bool last) {
    switch (options.record.mode) {
      case RecordPolicy::Mode::Full: trace.states.push_back({k, x}); break;
      case RecordPolicy::Mode::EveryKth:
        if (k % options.record.stride == 0 || last) trace.states.push_back({k, x});
        break;
      case RecordPolicy::Mode::None: break;
    }
  };

  for (std::uint64_t k = 0;; ++k) {
    for (int i = 0; i < n; ++i) index[i] = quantizer.index(x[i]);
    if (options.observer) options.observer(k, x);
    trace.last_k = k;

    if (deterministic ? all_equal(index) : probabilistic_absorbed(x, kind.step)) {
      const Rational level = deterministic ? kind.step * Rational(index.front()) : x.front();
      trace.verdict = QuantizedConsensus{k, level};
      trace.terminal = {x};
      record(k, true);
      return trace;
    }

    if (deterministic) {
      const auto [lo, hi] = std::minmax_element(index.begin(), index.end());
      if (k == 0 || (prune && (*lo != epoch_min || *hi != epoch_max))) {
        if (k != 0) store.clear();
        epoch_min = *lo;
        epoch_max = *hi;
      }
      if (const std::int64_t earlier = store.find_or_insert(k, x); earlier >= 0) {
        const auto t_conv = static_cast<std::uint64_t>(earlier);
        trace.verdict = Cycle{t_conv, k - t_conv};
        trace.terminal = store.slice(t_conv, k);
        record(k, true);
        return trace;
      }
    }

    if (k >= options.max_iters) {
      trace.verdict = Undecided{options.max_iters};
      record(k, true);
      return trace;
    }
    record(k, false);

    engine.advance(x, index, kind.step);
    if (conserving && state_sum(x) != sum0) {
      throw Error(ErrorCode::InternalInconsistency,
                  "state sum changed at iteration " + std::to_string(k + 1) + " under a column-stochastic W");
    }
  }
}

Verdict infer_verdict(std::span<const State> states, const QuantizerKind& kind) {
  std::unordered_map<std::size_t, std::vector<std::size_t>> seen;
  for (std::size_t k = 0; k < states.size(); ++k) {
    const State& x = states[k];
    if (kind.deterministic()) {
      Quantizer q(kind);
      std::vector<Integer> index;
      for (const auto& v : x) index.push_back(q.index(v));
      if (all_equal(index)) return QuantizedConsensus{k, kind.step * Rational(index.front())};
      auto& slots = seen[hash_state(x)];
      for (std::size_t j : slots) {
        if (states[j] == x) return Cycle{j, k - j};
      }
      slots.push_back(k);
    } else if (probabilistic_absorbed(x, kind.step)) {
      return QuantizedConsensus{k, x.front()};
    }
  }
  return Undecided{states.empty() ? 0 : states.size() - 1};
}

std::vector<State> simulate_linear(const WeightMatrix& w, const State& x0, std::uint64_t iters) {
  if (static_cast<int>(x0.size()) != w.size()) {
    throw Error(ErrorCode::InvalidArgument, "state dimension does not match the weight matrix");
  }
  std::vector<State> out{x0};
  out.reserve(iters + 1);
  for (std::uint64_t k = 0; k < iters; ++k) {
    const State& x = out.back();
    State next(x.size());
    for (int i = 0; i < w.size(); ++i) {
      Rational v = w.diag(i) * x[i];
      for (const auto& e : w.row(i)) v += e.value * x[e.col];
      next[i] = std::move(v);
    }
    out.push_back(std::move(next));
  }
  return out;
}

std::vector<std::vector<double>> simulate_linear_approx(const WeightMatrix& w, const std::vector<double>& x0,
                                                        std::uint64_t iters) {
  if (static_cast<int>(x0.size()) != w.size()) {
    throw Error(ErrorCode::InvalidArgument, "state dimension does not match the weight matrix");
  }
  std::vector<std::vector<double>> out{x0};
  for (std::uint64_t k = 0; k < iters; ++k) {
    const auto& x = out.back();
    std::vector<double> next(x.size());
    for (int i = 0; i < w.size(); ++i) {
      double v = w.diag(i).to_double() * x[i];
      for (const auto& e : w.row(i)) v += e.value.to_double() * x[e.col];
      next[i] = v;
    }
    out.push_back(std::move(next));
  }
  return out;
}

}  // namespace qcons
