#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qcons/numeric.hpp"
#include "qcons/rng.hpp"

namespace qcons {

enum class QuantizerVariant { Truncation, Ceiling, Rounding, Probabilistic };

/// CLI spellings: trunc, ceil, round, prob.
const char* to_string(QuantizerVariant v) noexcept;
QuantizerVariant parse_quantizer_variant(std::string_view name);

/// Quantizer configuration. The scaled form is Q_eps(x) = eps * Q(x / eps).
struct QuantizerKind {
  QuantizerVariant variant = QuantizerVariant::Truncation;
  Rational step = Rational(1);
  std::uint64_t seed = 0;  // only read by the probabilistic variant

  bool deterministic() const noexcept { return variant != QuantizerVariant::Probabilistic; }
};

/// A quantizer instance. Deterministic variants are pure; the probabilistic
/// variant owns its RNG stream, so an instance belongs to one simulation.
class Quantizer {
 public:
  explicit Quantizer(QuantizerKind kind);

  const QuantizerKind& kind() const noexcept { return kind_; }

  /// Integer index k with Q(x) = step * k.
  Integer index(const Rational& x);
  Rational operator()(const Rational& x) { return kind_.step * Rational(index(x)); }

 private:
  QuantizerKind kind_;
  std::optional<Rng> rng_;
};

/// Deterministic quantization (ParameterOutOfRange for Probabilistic).
Rational quantize(const QuantizerKind& kind, const Rational& x);

/// Affine change of variables y = sign * x / step + shift that turns a
/// deterministic quantized system into the unit-step truncation system.
struct TruncationFrame {
  int sign = 1;
  Rational step = Rational(1);
  Rational shift = Rational(0);

  Rational to_frame(const Rational& x) const;
  Rational from_frame(const Rational& y) const;
  std::vector<Rational> to_frame(std::span<const Rational> x) const;
  std::vector<Rational> from_frame(std::span<const Rational> y) const;
  bool identity() const;
  std::string describe() const;
};

TruncationFrame truncation_frame(const QuantizerKind& kind);

struct Reduction {
  std::vector<Rational> y0;
  TruncationFrame inverse;
};

/// Ceiling: y0 = -x0; rounding: y0 = x0 + 1/2; truncation: identity.
/// A non-unit step divides by it first. Probabilistic: UnsupportedReduction.
Reduction reduce_to_truncation(const QuantizerKind& kind, std::span<const Rational> x0);

}  // namespace qcons
