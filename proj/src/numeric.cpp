#include "qcons/numeric.hpp"

#include <cctype>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "qcons/error.hpp"

namespace qcons {

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

[[noreturn]] void parse_fail(std::string_view text) {
  throw Error(ErrorCode::ParseError, "not an exact rational: '" + std::string(text) + "'");
}

}  // namespace

Rational::Rational(const Integer& num, const Integer& den) {
  if (den == 0) throw Error(ErrorCode::InvalidArgument, "rational with zero denominator");
  v_.get_num() = num;
  v_.get_den() = den;
  v_.canonicalize();
}

Rational Rational::parse(std::string_view text) {
  const std::string_view s = trim(text);
  std::string_view body = s;
  bool negative = false;
  if (!body.empty() && (body.front() == '-' || body.front() == '+')) {
    negative = body.front() == '-';
    body.remove_prefix(1);
  }
  Rational out;
  if (const auto slash = body.find('/'); slash != std::string_view::npos) {
    const auto p = body.substr(0, slash);
    const auto q = body.substr(slash + 1);
    if (!all_digits(p) || !all_digits(q)) parse_fail(text);
    const Integer den(std::string(q), 10);
    if (den == 0) parse_fail(text);
    out = Rational(Integer(std::string(p), 10), den);
  } else if (const auto dot = body.find('.'); dot != std::string_view::npos) {
    const auto ip = body.substr(0, dot);
    const auto fp = body.substr(dot + 1);
    if (ip.empty() && fp.empty()) parse_fail(text);
    if ((!ip.empty() && !all_digits(ip)) || (!fp.empty() && !all_digits(fp))) parse_fail(text);
    Integer whole = ip.empty() ? Integer(0) : Integer(std::string(ip), 10);
    Integer scale = 1;
    Integer digits = 0;
    if (!fp.empty()) {
      mpz_ui_pow_ui(scale.get_mpz_t(), 10, fp.size());
      digits = Integer(std::string(fp), 10);
    }
    out = Rational(whole * scale + digits, scale);
  } else {
    if (!all_digits(body)) parse_fail(text);
    out = Rational(Integer(std::string(body), 10));
  }
  return negative ? -out : out;
}

Integer Rational::floor() const {
  Integer q;
  mpz_fdiv_q(q.get_mpz_t(), v_.get_num_mpz_t(), v_.get_den_mpz_t());
  return q;
}

Integer Rational::ceil() const {
  Integer q;
  mpz_cdiv_q(q.get_mpz_t(), v_.get_num_mpz_t(), v_.get_den_mpz_t());
  return q;
}

Rational Rational::frac() const {
  Integer r;
  mpz_fdiv_r(r.get_mpz_t(), v_.get_num_mpz_t(), v_.get_den_mpz_t());
  return Rational(r, v_.get_den());
}

Rational& Rational::operator/=(const Rational& o) {
  if (o.v_ == 0) throw Error(ErrorCode::InvalidArgument, "division by zero");
  v_ /= o.v_;
  return *this;
}

std::string Rational::str() const {
  if (is_integer()) return v_.get_num().get_str();
  return v_.get_num().get_str() + "/" + v_.get_den().get_str();
}

std::size_t hash_integer(const Integer& z) noexcept {
  const mpz_srcptr p = z.get_mpz_t();
  std::uint64_t h = 0x9e3779b97f4a7c15ULL ^ static_cast<std::uint64_t>(p->_mp_size);
  const std::size_t limbs = mpz_size(p);
  const mp_limb_t* data = mpz_limbs_read(p);
  for (std::size_t i = 0; i < limbs; ++i) {
    h ^= static_cast<std::uint64_t>(data[i]) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h *= 0xff51afd7ed558ccdULL;
    h ^= h >> 33;
  }
  return static_cast<std::size_t>(h);
}

std::size_t Rational::hash() const noexcept {
  const std::size_t a = hash_integer(v_.get_num());
  const std::size_t b = hash_integer(v_.get_den());
  return a ^ (b * 0xc4ceb9fe1a85ec53ULL + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
}

std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

Rational min(const Rational& a, const Rational& b) { return b < a ? b : a; }
Rational max(const Rational& a, const Rational& b) { return a < b ? b : a; }

Integer lcm(const Integer& a, const Integer& b) {
  Integer out;
  mpz_lcm(out.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return out;
}

Integer lcm_denominators(std::span<const Rational> weights_row) {
  if (weights_row.empty()) {
    throw Error(ErrorCode::EmptyNeighborhood, "lcm of an empty weight row");
  }
  Integer out = 1;
  for (const auto& w : weights_row) {
    if (w.sign() <= 0) {
      throw Error(ErrorCode::InvalidArgument, "weight " + w.str() + " is not strictly positive");
    }
    out = lcm(out, w.den());
  }
  return out;
}

bool exact_sqrt(const Rational& x, Rational& root) {
  if (x.sign() < 0) return false;
  if (mpz_perfect_square_p(x.num().get_mpz_t()) == 0 ||
      mpz_perfect_square_p(x.den().get_mpz_t()) == 0) {
    return false;
  }
  Integer n;
  Integer d;
  mpz_sqrt(n.get_mpz_t(), x.num().get_mpz_t());
  mpz_sqrt(d.get_mpz_t(), x.den().get_mpz_t());
  root = Rational(n, d);
  return true;
}

std::string sqrt_decimal(const Rational& x, int digits) {
  if (x.sign() < 0) throw Error(ErrorCode::InvalidArgument, "square root of a negative value");
  const mp_bitcnt_t bits = static_cast<mp_bitcnt_t>(digits) * 4 + 64;
  mpf_class v(x.raw(), bits);
  mpf_class r(0, bits);
  mpf_sqrt(r.get_mpf_t(), v.get_mpf_t());
  std::ostringstream os;
  os << std::setprecision(digits) << r;
  return os.str();
}

}  // namespace qcons
