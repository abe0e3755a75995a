#include "qcons/analysis.hpp"

#include <algorithm>
#include <ostream>
#include <sstream>

#include "qcons/error.hpp"

namespace qcons {

const char* to_string(SetLabel s) noexcept {
  switch (s) {
    case SetLabel::X1: return "X1";
    case SetLabel::X2: return "X2";
    case SetLabel::X3: return "X3";
    case SetLabel::X4: return "X4";
    case SetLabel::X5: return "X5";
    case SetLabel::X6: return "X6";
  }
  return "?";
}

Integer min_floor(std::span<const Rational> x) {
  if (x.empty()) throw Error(ErrorCode::InvalidArgument, "empty state");
  Integer m = x.front().floor();
  for (const auto& v : x.subspan(1)) {
    Integer f = v.floor();
    if (f < m) m = std::move(f);
  }
  return m;
}

Integer max_floor(std::span<const Rational> x) {
  if (x.empty()) throw Error(ErrorCode::InvalidArgument, "empty state");
  Integer m = x.front().floor();
  for (const auto& v : x.subspan(1)) {
    Integer f = v.floor();
    if (f > m) m = std::move(f);
  }
  return m;
}

namespace {

void check_dims(std::span<const Rational> x, std::span<const Rational> alpha) {
  if (x.size() != alpha.size()) throw Error(ErrorCode::InvalidArgument, "alpha and state dimensions differ");
}

SetLabel label_of(const Rational& x, const Rational& m1, const Rational& a) {
  // m1 = m + 1
  if (x < m1 - a) return SetLabel::X1;
  if (x < m1) return SetLabel::X2;
  if (x <= m1 + a) return SetLabel::X3;
  const Rational m2 = m1 + Rational(1);
  if (x < m2) return SetLabel::X4;
  if (x < m2 + a) return SetLabel::X5;
  return SetLabel::X6;
}

bool upper(SetLabel s) { return s >= SetLabel::X4; }
bool in_x56(SetLabel s) { return s >= SetLabel::X5; }
bool lower(SetLabel s) { return s <= SetLabel::X2; }

int idx(SetLabel s) { return static_cast<int>(s) - 1; }

}  // namespace

std::vector<SetLabel> classify_sets(std::span<const Rational> x, const Integer& m, std::span<const Rational> alpha) {
  check_dims(x, alpha);
  const Rational base(m);
  const Rational m1 = base + Rational(1);
  std::vector<SetLabel> out;
  out.reserve(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < base) {
      throw Error(ErrorCode::InternalInconsistency,
                  "x_" + std::to_string(i) + " = " + x[i].str() + " lies below m = " + base.str());
    }
    out.push_back(label_of(x[i], m1, alpha[i]));
  }
  return out;
}

Rational lyapunov(std::span<const Rational> x, const Integer& m, std::span<const Rational> alpha) {
  check_dims(x, alpha);
  const Rational m1 = Rational(m) + Rational(1);
  Rational v;
  for (std::size_t i = 0; i < x.size(); ++i) {
    Rational d = (x[i] - m1).abs() - alpha[i];
    if (d.sign() > 0) v += d;
  }
  return v;
}

Situations detect_situations(const Graph& g, std::span<const SetLabel> labels) {
  if (static_cast<int>(labels.size()) != g.size()) {
    throw Error(ErrorCode::InvalidArgument, "label vector does not match the graph");
  }
  Situations s;
  for (const Edge& e : g.edges()) {
    const SetLabel a = labels[e.u];
    const SetLabel b = labels[e.v];
    if ((upper(a) && lower(b)) || (upper(b) && lower(a))) s.s1 = true;
    if ((in_x56(a) && b == SetLabel::X3) || (in_x56(b) && a == SetLabel::X3)) s.s2 = true;
    if ((a == SetLabel::X1 && b == SetLabel::X3) || (b == SetLabel::X1 && a == SetLabel::X3)) s.s3 = true;
  }
  return s;
}

std::string LemmaReport::summary() const {
  std::ostringstream os;
  if (!applicable) {
    os << "not applicable: " << reason;
    return os.str();
  }
  os << iterations << " iterations, " << violations.size() << " violation(s)";
  if (!violations.empty()) {
    const Violation& v = violations.front();
    os << "; first: " << v.check << " at k=" << v.k;
    if (v.node >= 0) os << " node " << v.node;
    if (!v.detail.empty()) os << " (" << v.detail << ")";
  }
  return os.str();
}

namespace {

constexpr std::size_t kMaxStoredViolations = 64;

bool any_upper(const std::array<int, 6>& c) { return c[3] + c[4] + c[5] > 0; }

}  // namespace

LyapunovMonitor::LyapunovMonitor(const Graph& g, const WeightMatrix& w, GridConstants constants,
                                 MonitorOptions options)
    : graph_(&g), constants_(std::move(constants)), options_(options) {
  if (w.size() != g.size() || static_cast<int>(constants_.alpha.size()) != g.size()) {
    throw Error(ErrorCode::InvalidArgument, "monitor dimensions differ");
  }
  for (int i = 0; i < w.size(); ++i) neighbor_mass_.push_back(w.off_diagonal_sum(i));
}

void LyapunovMonitor::violation(std::string check, std::uint64_t k, int node, std::string detail) {
  if (report_.violations.size() < kMaxStoredViolations) {
    report_.violations.push_back({std::move(check), k, node, std::move(detail)});
  }
}

void LyapunovMonitor::observe(std::uint64_t k, std::span<const Rational> x) {
  if (finished_) throw Error(ErrorCode::InvalidArgument, "monitor already finished");
  const int n = graph_->size();
  if (static_cast<int>(x.size()) != n) throw Error(ErrorCode::InvalidArgument, "state dimension differs");
  if (!iterations_.empty() && k != iterations_.back().k + 1) {
    throw Error(ErrorCode::InvalidArgument, "monitor needs consecutive iterations");
  }
  const auto& alpha = constants_.alpha;

  IterationReport r;
  r.k = k;
  r.m = min_floor(x);
  r.M = max_floor(x);

  if (iterations_.empty()) {
    for (const auto& v : x) initial_decimals_.push_back(v.frac());
  } else {
    IterationReport& prev = iterations_.back();
    if (r.m < prev.m) violation("MonotoneMin", k, -1, "m fell from " + prev.m.get_str() + " to " + r.m.get_str());
    if (r.M > prev.M) violation("MonotoneMax", k, -1, "M rose from " + prev.M.get_str() + " to " + r.M.get_str());

    // Differences are taken against the earlier reference level m(k-1), so a
    // step on which m rises is still compared on one fixed box.
    if (r.m >= prev.m) {
      const auto now = classify_sets(x, prev.m, alpha);
      const Rational dv = lyapunov(x, prev.m, alpha) - prev.V;
      prev.delta_v = dv;
      const Rational beta = constants_.beta();
      if (dv.sign() > 0) violation("LyapunovIncrease", prev.k, -1, "dV = " + dv.str());
      if ((prev.situations.s1 || prev.situations.s2) && dv > -beta) {
        violation("SituationDrop", prev.k, -1, "S1/S2 fired but dV = " + dv.str() + " > -" + beta.str());
      }
      if (prev.situations.s3 && !any_upper(prev.counts) && dv > -beta) {
        violation("S3Drop", prev.k, -1, "S3 fired but dV = " + dv.str() + " > -" + beta.str());
      }
      for (int i = 0; i < n; ++i) {
        if (last_labels_[i] != SetLabel::X1 && now[i] == SetLabel::X1) {
          violation("ReenterX1", k, i, std::string("from ") + to_string(last_labels_[i]));
        }
      }
      std::array<int, 6> c{};
      for (SetLabel s : now) ++c[idx(s)];
      if (prev.counts[5] == 0 && c[5] > 0) violation("AbsorbingX6", k, -1, "X6 refilled");
      if (prev.counts[4] + prev.counts[5] == 0 && c[4] + c[5] > 0) violation("AbsorbingX56", k, -1, "X5/X6 refilled");
      if (!any_upper(prev.counts) && any_upper(c)) violation("AbsorbingX456", k, -1, "X4/X5/X6 refilled");
    }
  }

  // Decimal grid and the gamma margins.
  const Rational two_gamma = constants_.gamma * Rational(2);
  for (int i = 0; i < n; ++i) {
    const Rational c = x[i].frac();
    const Rational moved = (c - initial_decimals_[i]) * Rational(constants_.B[i]);
    if (!moved.is_integer()) violation("DecimalGrid", k, i, "c = " + c.str());
    const Rational cbar = Rational(1) - c;
    const Rational& s = neighbor_mass_[i];
    if (c > s && c - s < two_gamma) violation("GammaMargin", k, i, "c - s = " + (c - s).str());
    if (cbar > s && cbar - s < two_gamma) violation("GammaMargin", k, i, "cbar - s = " + (cbar - s).str());
    if (cbar < two_gamma) violation("GammaMargin", k, i, "cbar = " + cbar.str());
  }

  const auto labels = classify_sets(x, r.m, alpha);
  const Rational m1 = Rational(r.m) + Rational(1);
  for (int i = 0; i < n; ++i) {
    ++r.counts[idx(labels[i])];
    if ((x[i] - m1).abs() == alpha[i]) violation("BoundaryPoint", k, i, "x = " + x[i].str());
  }
  r.V = lyapunov(x, r.m, alpha);
  r.situations = detect_situations(*graph_, labels);
  report_.s1_count += r.situations.s1;
  report_.s2_count += r.situations.s2;
  report_.s3_count += r.situations.s3;
  if (options_.keep_labels) r.labels = labels;
  last_labels_ = labels;
  iterations_.push_back(std::move(r));
  report_.iterations = iterations_.size();
}

void LyapunovMonitor::finish(const Verdict& verdict) {
  if (finished_) return;
  finished_ = true;
  if (iterations_.empty()) return;

  if (const auto* c = std::get_if<QuantizedConsensus>(&verdict)) {
    if (c->k0 >= iterations_.front().k && c->k0 <= iterations_.back().k) {
      const IterationReport& at = iterations_[c->k0 - iterations_.front().k];
      if (at.counts[2] + at.counts[3] + at.counts[4] + at.counts[5] > 0) {
        violation("TerminalSets", at.k, -1, "consensus state outside X1/X2");
      }
    }
  } else if (const auto* cy = std::get_if<Cycle>(&verdict)) {
    for (const auto& r : iterations_) {
      if (r.k < cy->t_conv) continue;
      if (r.counts[0] + r.counts[3] + r.counts[4] + r.counts[5] > 0) {
        violation("TerminalSets", r.k, -1, "cycle state outside X2/X3");
      }
      if (r.V.sign() != 0) violation("TerminalLyapunov", r.k, -1, "V = " + r.V.str() + " in the cycle");
    }
  } else {
    violation("Undecided", iterations_.back().k, -1, "no verdict within the iteration budget");
  }

  const int n = graph_->size();
  if (options_.force_bounds || n <= options_.bound_max_n) measure_waiting_times();
}

void LyapunovMonitor::measure_waiting_times() {
  report_.bounds_evaluated = true;
  const int n = graph_->size();
  const Rational beta = constants_.beta();
  Rational growth(1);
  const Rational factor = Rational(1) + Rational(1) / (Rational(2) * constants_.delta);
  for (int i = 1; i < n; ++i) growth *= factor;
  report_.wait_bound = Rational(n) * growth;

  const std::size_t T = iterations_.size();
  // next_drop[k]: first j >= k with dV_j <= -beta; next_exit[k]: first j >= k
  // with X4..X6 empty. T means none observed.
  std::vector<std::size_t> next_drop(T + 1, T);
  std::vector<std::size_t> next_exit(T + 1, T);
  std::vector<std::size_t> run_end(T + 1, T);  // first j > k with m(j) != m(k)
  for (std::size_t k = T; k-- > 0;) {
    const auto& r = iterations_[k];
    next_drop[k] = (r.delta_v && *r.delta_v <= -beta) ? k : next_drop[k + 1];
    next_exit[k] = any_upper(r.counts) ? next_exit[k + 1] : k;
    run_end[k] = (k + 1 < T && iterations_[k + 1].m == r.m) ? run_end[k + 1] : k + 1;
  }

  for (std::size_t k0 = 0; k0 < T; ++k0) {
    const auto& r = iterations_[k0];
    if (!any_upper(r.counts)) continue;

    if (const std::size_t j = next_drop[k0 + 1]; j < T && j < run_end[k0]) {
      const std::uint64_t wait = j - k0;
      ++report_.wait_samples;
      report_.max_wait = std::max(report_.max_wait, wait);
      if (Rational(wait) > report_.wait_bound) {
        violation("WaitBound", r.k, -1, "R = " + std::to_string(wait) + " exceeds " + report_.wait_bound.str());
      }
    }

    const std::size_t k1 = std::min(next_exit[k0], run_end[k0]);
    if (k1 < T) {
      const std::uint64_t span = k1 - k0;
      ++report_.exit_samples;
      report_.max_exit = std::max(report_.max_exit, span);
      if (Rational(span) > report_.wait_bound) {
        const Rational bound = Rational(n) * (r.V / beta + Rational(1)) * growth;
        if (Rational(span) > bound) {
          violation("ExitBound", r.k, -1, "k1 - k0 = " + std::to_string(span) + " exceeds " + bound.str());
        }
      }
    }
  }
}

namespace {

LemmaReport not_applicable(std::string reason) {
  LemmaReport r;
  r.applicable = false;
  r.reason = std::move(reason);
  return r;
}

std::optional<std::string> applicability(const Graph& g, const WeightMatrix& w) {
  const AssumptionReport a = validate_assumption1(w, g);
  if (!a.satisfied()) return a.summary();
  return std::nullopt;
}

}  // namespace

LemmaReport check_lemmas(std::span<const State> frame_states, const Verdict& verdict, const Graph& g,
                         const WeightMatrix& w, const MonitorOptions& options) {
  if (auto why = applicability(g, w)) return not_applicable(*why);
  if (frame_states.empty()) throw Error(ErrorCode::InvalidArgument, "no states to check");
  LyapunovMonitor monitor(g, w, compute_grid_constants(w, frame_states.front()), options);
  for (std::size_t k = 0; k < frame_states.size(); ++k) monitor.observe(k, frame_states[k]);
  monitor.finish(verdict);
  return monitor.report();
}

LemmaReport check_lemmas(const Trace& trace, const Graph& g, const WeightMatrix& w, const MonitorOptions& options) {
  if (!trace.quantizer.deterministic()) return not_applicable("probabilistic quantizer");
  if (trace.states.empty() || trace.states.front().k != 0 || trace.states.back().k != trace.last_k ||
      trace.states.size() != trace.last_k + 1) {
    throw Error(ErrorCode::InvalidArgument, "lemma check needs a fully recorded trace");
  }
  const TruncationFrame frame = truncation_frame(trace.quantizer);
  std::vector<State> states;
  states.reserve(trace.states.size());
  for (const auto& s : trace.states) states.push_back(frame.to_frame(s.x));
  return check_lemmas(states, trace.verdict, g, w, options);
}

Trace trace_from_states(std::vector<Snapshot> states, const QuantizerKind& q) {
  if (states.empty()) throw Error(ErrorCode::InvalidArgument, "empty trace");
  for (std::size_t k = 0; k < states.size(); ++k) {
    if (states[k].k != k) throw Error(ErrorCode::InvalidArgument, "trace is not contiguous from k = 0");
  }
  std::vector<State> xs;
  xs.reserve(states.size());
  for (const auto& s : states) xs.push_back(s.x);
  Trace t;
  t.quantizer = q;
  t.verdict = infer_verdict(xs, q);
  t.initial = xs.front();
  if (const auto* c = std::get_if<QuantizedConsensus>(&t.verdict)) {
    t.terminal = {xs[c->k0]};
    states.resize(c->k0 + 1);
  } else if (const auto* c = std::get_if<Cycle>(&t.verdict)) {
    t.terminal.assign(xs.begin() + static_cast<std::ptrdiff_t>(c->t_conv),
                      xs.begin() + static_cast<std::ptrdiff_t>(c->t_conv + c->period));
    states.resize(c->t_conv + c->period + 1);
  }
  t.states = std::move(states);
  t.last_k = t.states.back().k;
  return t;
}

MonitoredRun simulate_monitored(const Graph& g, const WeightMatrix& w, const QuantizerKind& q, State x0,
                                SimOptions sim, const MonitorOptions& monitor_options) {
  MonitoredRun out;
  std::optional<LyapunovMonitor> monitor;
  std::optional<TruncationFrame> frame;
  if (!q.deterministic()) {
    out.report = not_applicable("probabilistic quantizer");
  } else if (auto why = applicability(g, w)) {
    out.report = not_applicable(*why);
  } else {
    frame = truncation_frame(q);
    out.constants = compute_grid_constants(w, frame->to_frame(x0));
    monitor.emplace(g, w, *out.constants, monitor_options);
  }
  if (monitor) {
    StateObserver user = std::move(sim.observer);
    sim.observer = [&, user = std::move(user)](std::uint64_t k, const State& x) {
      monitor->observe(k, frame->identity() ? x : frame->to_frame(x));
      if (user) user(k, x);
    };
  }
  out.trace = simulate(g, w, q, std::move(x0), sim);
  if (monitor) {
    monitor->finish(out.trace.verdict);
    out.report = monitor->report();
    out.iterations = monitor->iterations();
  }
  return out;
}

namespace {

void require_decided(const Trace& t) {
  if (!is_decided(t.verdict)) throw Error(ErrorCode::NotConverged, "trace has no verdict");
  if (t.terminal.empty()) throw Error(ErrorCode::InternalInconsistency, "decided trace without terminal states");
}

}  // namespace

DInfinity d_infinity(const Trace& trace) {
  require_decided(trace);
  const Rational ave = state_average(trace.initial);
  const Rational n(trace.initial.size());
  DInfinity out;
  for (const State& x : trace.terminal) {
    Rational s;
    for (const auto& v : x) {
      const Rational d = v - ave;
      s += d * d;
    }
    out.squared = max(out.squared, s / n);
  }
  if (Rational root; exact_sqrt(out.squared, root)) out.exact = root;
  out.decimal = sqrt_decimal(out.squared);
  return out;
}

Rational terminal_deviation(const Trace& trace) {
  require_decided(trace);
  const Rational ave = state_average(trace.initial);
  Rational worst;
  for (const State& x : trace.terminal) {
    for (const auto& v : x) worst = max(worst, (v - ave).abs());
  }
  return worst;
}

void RunningAverage::observe(std::span<const Rational> x) {
  if (count_ == 0) {
    y_.assign(x.begin(), x.end());
  } else {
    if (x.size() != y_.size()) throw Error(ErrorCode::InvalidArgument, "state dimension differs");
    const Rational k(count_);
    const Rational k1(count_ + 1);
    for (std::size_t i = 0; i < x.size(); ++i) y_[i] = (k * y_[i] + x[i]) / k1;
  }
  ++count_;
}

RunningAverageResult running_average(const Trace& trace) {
  require_decided(trace);
  RunningAverageResult out;
  const std::size_t n = trace.initial.size();
  out.limit.assign(n, Rational());
  for (const State& x : trace.terminal) {
    for (std::size_t i = 0; i < n; ++i) out.limit[i] += x[i];
  }
  const Rational p(trace.terminal.size());
  for (auto& v : out.limit) v /= p;

  const bool full = !trace.states.empty() && trace.states.front().k == 0 &&
                    trace.states.size() == trace.last_k + 1;
  if (full) {
    RunningAverage avg;
    out.sequence.reserve(trace.states.size());
    for (const auto& s : trace.states) {
      avg.observe(s.x);
      out.sequence.push_back(avg.estimate());
    }
  }
  return out;
}

bool consensus_certificate(std::span<const Rational> x0, const Rational& alpha_max) {
  const Rational f = state_average(x0).frac();
  return alpha_max <= f && f <= Rational(1) - alpha_max;
}

void write_instrumentation_csv(std::ostream& os, std::span<const IterationReport> rows) {
  os << "k,m,M,V_num,V_den,n_X1,n_X2,n_X3,n_X4,n_X5,n_X6,S1,S2,S3\n";
  for (const auto& r : rows) {
    os << r.k << ',' << r.m << ',' << r.M << ',' << r.V.num() << ',' << r.V.den();
    for (int c : r.counts) os << ',' << c;
    os << ',' << int(r.situations.s1) << ',' << int(r.situations.s2) << ',' << int(r.situations.s3) << '\n';
  }
}

}  // namespace qcons
