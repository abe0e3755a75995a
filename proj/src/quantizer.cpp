#include "qcons/quantizer.hpp"

#include <limits>

#include "qcons/error.hpp"

namespace qcons {

const char* to_string(QuantizerVariant v) noexcept {
  switch (v) {
    case QuantizerVariant::Truncation: return "trunc";
    case QuantizerVariant::Ceiling: return "ceil";
    case QuantizerVariant::Rounding: return "round";
    case QuantizerVariant::Probabilistic: return "prob";
  }
  return "unknown";
}

QuantizerVariant parse_quantizer_variant(std::string_view name) {
  if (name == "trunc" || name == "truncation") return QuantizerVariant::Truncation;
  if (name == "ceil" || name == "ceiling") return QuantizerVariant::Ceiling;
  if (name == "round" || name == "rounding") return QuantizerVariant::Rounding;
  if (name == "prob" || name == "probabilistic") return QuantizerVariant::Probabilistic;
  throw Error(ErrorCode::ParseError, "unknown quantizer '" + std::string(name) + "'");
}

Quantizer::Quantizer(QuantizerKind kind) : kind_(std::move(kind)) {
  if (kind_.step.sign() <= 0) throw Error(ErrorCode::ParameterOutOfRange, "quantizer step must be positive");
  if (!kind_.deterministic()) rng_.emplace(kind_.seed);
}

Integer Quantizer::index(const Rational& x) {
  const Rational scaled = kind_.step == Rational(1) ? x : x / kind_.step;
  switch (kind_.variant) {
    case QuantizerVariant::Truncation: return scaled.floor();
    case QuantizerVariant::Ceiling: return scaled.ceil();
    case QuantizerVariant::Rounding: {
      // Ties go up: frac >= 1/2 maps to the ceiling.
      const Integer f = scaled.floor();
      return scaled.frac() >= Rational(1, 2) ? Integer(f + 1) : f;
    }
    case QuantizerVariant::Probabilistic: {
      const Integer f = scaled.floor();
      const Rational frac = scaled.frac();
      if (frac.sign() == 0) return f;
      // Up with probability frac = a/b, drawn exactly as r < a for r uniform on [0, b).
      if (frac.den().fits_ulong_p()) {
        const std::uint64_t b = frac.den().get_ui();
        const std::uint64_t a = frac.num().get_ui();
        return rng_->uniform_below(b) < a ? Integer(f + 1) : f;
      }
      return rng_->uniform01() < frac.to_double() ? Integer(f + 1) : f;
    }
  }
  throw Error(ErrorCode::InternalInconsistency, "unhandled quantizer variant");
}

Rational quantize(const QuantizerKind& kind, const Rational& x) {
  if (!kind.deterministic()) {
    throw Error(ErrorCode::ParameterOutOfRange, "the probabilistic quantizer needs a Quantizer instance");
  }
  Quantizer q(kind);
  return q(x);
}

Rational TruncationFrame::to_frame(const Rational& x) const {
  Rational y = step == Rational(1) ? x : x / step;
  if (sign < 0) y = -y;
  return y + shift;
}

Rational TruncationFrame::from_frame(const Rational& y) const {
  Rational x = y - shift;
  if (sign < 0) x = -x;
  return step == Rational(1) ? x : x * step;
}

std::vector<Rational> TruncationFrame::to_frame(std::span<const Rational> x) const {
  std::vector<Rational> out;
  out.reserve(x.size());
  for (const auto& v : x) out.push_back(to_frame(v));
  return out;
}

std::vector<Rational> TruncationFrame::from_frame(std::span<const Rational> y) const {
  std::vector<Rational> out;
  out.reserve(y.size());
  for (const auto& v : y) out.push_back(from_frame(v));
  return out;
}

bool TruncationFrame::identity() const { return sign > 0 && step == Rational(1) && shift.sign() == 0; }

std::string TruncationFrame::describe() const {
  std::string s = sign < 0 ? "y = -x" : "y = x";
  if (step != Rational(1)) s += " / " + step.str();
  if (shift.sign() != 0) s += " + " + shift.str();
  return s;
}

TruncationFrame truncation_frame(const QuantizerKind& kind) {
  if (kind.step.sign() <= 0) throw Error(ErrorCode::ParameterOutOfRange, "quantizer step must be positive");
  TruncationFrame f;
  f.step = kind.step;
  switch (kind.variant) {
    case QuantizerVariant::Truncation: break;
    case QuantizerVariant::Ceiling: f.sign = -1; break;
    case QuantizerVariant::Rounding: f.shift = Rational(1, 2); break;
    case QuantizerVariant::Probabilistic:
      throw Error(ErrorCode::UnsupportedReduction, "the probabilistic quantizer has no truncation reduction");
  }
  return f;
}

Reduction reduce_to_truncation(const QuantizerKind& kind, std::span<const Rational> x0) {
  TruncationFrame f = truncation_frame(kind);
  return Reduction{f.to_frame(x0), f};
}

}  // namespace qcons
