#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qcons/dynamics.hpp"
#include "qcons/graph.hpp"
#include "qcons/grid.hpp"
#include "qcons/numeric.hpp"
#include "qcons/weights.hpp"

// Runtime monitors for the truncation system. States handed to the monitors
// must already be in the truncation frame (see truncation_frame()); the
// *_trace helpers below do the conversion for simulator traces.

namespace qcons {

enum class SetLabel : std::uint8_t { X1 = 1, X2, X3, X4, X5, X6 };

const char* to_string(SetLabel s) noexcept;

Integer min_floor(std::span<const Rational> x);
Integer max_floor(std::span<const Rational> x);

/// Position of each x_i relative to m+1 and the margin alpha_i:
///   X1: m <= x < m+1-a      X4: m+1+a < x < m+2
///   X2: m+1-a <= x < m+1    X5: m+2 <= x < m+2+a
///   X3: m+1 <= x <= m+1+a   X6: x >= m+2+a
/// InternalInconsistency when some x_i < m.
std::vector<SetLabel> classify_sets(std::span<const Rational> x, const Integer& m, std::span<const Rational> alpha);

/// V = sum_i max(|x_i - m - 1| - alpha_i, 0): the l1 distance to the box S_k.
Rational lyapunov(std::span<const Rational> x, const Integer& m, std::span<const Rational> alpha);

struct Situations {
  bool s1 = false;  // edge X4/X5/X6 -- X1/X2
  bool s2 = false;  // edge X5/X6 -- X3
  bool s3 = false;  // edge X1 -- X3
};

Situations detect_situations(const Graph& g, std::span<const SetLabel> labels);

struct IterationReport {
  std::uint64_t k = 0;
  Integer m;
  Integer M;
  Rational V;
  std::array<int, 6> counts{};  // nodes in X1..X6
  Situations situations;
  std::optional<Rational> delta_v;  // V(k+1) - V(k), set once k+1 is observed
  std::vector<SetLabel> labels;     // only when MonitorOptions::keep_labels
};

struct MonitorOptions {
  /// The waiting-time bounds grow like (1 + 1/(2 delta))^(n-1); they are only
  /// evaluated for n up to this size unless force_bounds is set.
  int bound_max_n = 12;
  bool force_bounds = false;
  bool keep_labels = false;
};

struct Violation {
  std::string check;
  std::uint64_t k = 0;
  int node = -1;
  std::string detail;
};

struct LemmaReport {
  bool applicable = true;
  std::string reason;  // why not applicable
  std::vector<Violation> violations;
  std::uint64_t iterations = 0;
  std::uint64_t s1_count = 0;
  std::uint64_t s2_count = 0;
  std::uint64_t s3_count = 0;
  /// Strict-decrease waiting times R(k0) in phases with X4..X6 non-empty and m constant.
  bool bounds_evaluated = false;
  std::uint64_t wait_samples = 0;
  std::uint64_t max_wait = 0;
  Rational wait_bound;   // n (1 + 1/(2 delta))^(n-1)
  /// Time until X4..X6 empties or m grows, against its V-dependent bound.
  std::uint64_t exit_samples = 0;
  std::uint64_t max_exit = 0;

  bool ok() const noexcept { return applicable && violations.empty(); }
  std::string summary() const;
};

/// Streaming checker. Feed consecutive frame states with observe(), then call
/// finish() with the verdict. Monitors never touch the dynamics.
class LyapunovMonitor {
 public:
  LyapunovMonitor(const Graph& g, const WeightMatrix& w, GridConstants constants, MonitorOptions options = {});

  void observe(std::uint64_t k, std::span<const Rational> x);
  void finish(const Verdict& verdict);

  const GridConstants& constants() const noexcept { return constants_; }
  const std::vector<IterationReport>& iterations() const noexcept { return iterations_; }
  const LemmaReport& report() const noexcept { return report_; }

 private:
  void violation(std::string check, std::uint64_t k, int node, std::string detail);
  void measure_waiting_times();

  const Graph* graph_;
  GridConstants constants_;
  MonitorOptions options_;
  std::vector<Rational> neighbor_mass_;
  std::vector<Rational> initial_decimals_;
  std::vector<IterationReport> iterations_;
  std::vector<SetLabel> last_labels_;
  LemmaReport report_;
  bool finished_ = false;
};

/// Post-hoc check of a contiguous frame-state sequence starting at k = 0.
/// Reports not-applicable when the weights fail the assumption check.
LemmaReport check_lemmas(std::span<const State> frame_states, const Verdict& verdict, const Graph& g,
                         const WeightMatrix& w, const MonitorOptions& options = {});

/// Same for a simulator trace recorded with RecordPolicy::full().
LemmaReport check_lemmas(const Trace& trace, const Graph& g, const WeightMatrix& w,
                         const MonitorOptions& options = {});

struct MonitoredRun {
  Trace trace;
  LemmaReport report;
  std::vector<IterationReport> iterations;
  std::optional<GridConstants> constants;
};

/// Rebuilds a trace from contiguous recorded states x(0)..x(T), classifying it
/// with infer_verdict(). InvalidArgument when iterations are missing.
Trace trace_from_states(std::vector<Snapshot> states, const QuantizerKind& q);

/// simulate() with a LyapunovMonitor attached as observer.
MonitoredRun simulate_monitored(const Graph& g, const WeightMatrix& w, const QuantizerKind& q, State x0,
                                SimOptions sim = {}, const MonitorOptions& monitor = {});

struct DInfinity {
  Rational squared;             // max over the terminal regime of (1/n) |x - x_ave 1|^2
  std::optional<Rational> exact;  // square root when it is rational
  std::string decimal;
};

/// limsup_k (1/sqrt n) |x(k) - x_ave 1|, taken over one terminal period.
/// NotConverged for an Undecided trace.
DInfinity d_infinity(const Trace& trace);

/// max_i max_t |x_i(t) - x_ave| over the terminal regime.
Rational terminal_deviation(const Trace& trace);

/// y_i(k) = (1/(k+1)) sum_{t<=k} x_i(t), updated exactly.
class RunningAverage {
 public:
  void observe(std::span<const Rational> x);
  const State& estimate() const noexcept { return y_; }
  std::uint64_t k() const noexcept { return count_ == 0 ? 0 : count_ - 1; }

 private:
  State y_;
  std::uint64_t count_ = 0;
};

struct RunningAverageResult {
  std::vector<State> sequence;  // y(0..last) when the trace is fully recorded
  State limit;                  // period average of the terminal regime
};

/// NotConverged for an Undecided trace.
RunningAverageResult running_average(const Trace& trace);

/// alpha <= frac(x_ave) <= 1 - alpha, with x0 in the truncation frame.
bool consensus_certificate(std::span<const Rational> x0, const Rational& alpha_max);

/// "k,m,M,V_num,V_den,n_X1,...,n_X6,S1,S2,S3" rows.
void write_instrumentation_csv(std::ostream& os, std::span<const IterationReport> rows);

}  // namespace qcons
