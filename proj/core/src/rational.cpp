#include "pregma/rational.hpp"

#include <cctype>
#include <sstream>

namespace pregma {

namespace {

bool is_integer_text(std::string_view s) {
  if (s.empty()) return false;
  std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
  if (i == s.size()) return false;
  for (; i < s.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  }
  return true;
}

mpz_class parse_integer(std::string_view s) {
  std::string t(s);
  if (!t.empty() && t[0] == '+') t.erase(0, 1);
  return mpz_class(t, 10);
}

Rational parse_decimal(std::string_view text) {
  std::string_view mantissa = text;
  long exponent = 0;
  if (auto e = text.find_first_of("eE"); e != std::string_view::npos) {
    std::string_view exp_text = text.substr(e + 1);
    if (!is_integer_text(exp_text)) throw Error("malformed rational: " + std::string(text));
    exponent = std::stol(std::string(exp_text));
    mantissa = text.substr(0, e);
  }
  bool negative = false;
  if (!mantissa.empty() && (mantissa[0] == '-' || mantissa[0] == '+')) {
    negative = mantissa[0] == '-';
    mantissa.remove_prefix(1);
  }
  std::string digits;
  long fraction_digits = 0;
  bool seen_dot = false;
  for (char c : mantissa) {
    if (c == '.') {
      if (seen_dot) throw Error("malformed rational: " + std::string(text));
      seen_dot = true;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      digits.push_back(c);
      if (seen_dot) ++fraction_digits;
    } else {
      throw Error("malformed rational: " + std::string(text));
    }
  }
  if (digits.empty()) throw Error("malformed rational: " + std::string(text));
  mpz_class num(digits, 10);
  if (negative) num = -num;
  long shift = exponent - fraction_digits;
  mpz_class ten_pow;
  mpz_ui_pow_ui(ten_pow.get_mpz_t(), 10, static_cast<unsigned long>(shift < 0 ? -shift : shift));
  Rational q = shift >= 0 ? Rational(num * ten_pow) : Rational(num, ten_pow);
  q.canonicalize();
  return q;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    auto num = text.substr(0, slash);
    auto den = text.substr(slash + 1);
    if (!is_integer_text(num) || !is_integer_text(den)) {
      throw Error("malformed rational: " + std::string(text));
    }
    mpz_class d = parse_integer(den);
    if (d == 0) throw Error("zero denominator: " + std::string(text));
    Rational q(parse_integer(num), d);
    q.canonicalize();
    return q;
  }
  if (is_integer_text(text)) return Rational(parse_integer(text));
  return parse_decimal(text);
}

std::string to_fraction(const Rational& q) {
  if (q.get_den() == 1) return q.get_num().get_str();
  return q.get_num().get_str() + "/" + q.get_den().get_str();
}

std::string to_decimal(const Rational& q, int digits) {
  mpz_class scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(digits));
  mpz_class num = q.get_num() * scale;
  mpz_class rounded;
  // round half away from zero
  mpz_class twice = 2 * num + (num >= 0 ? q.get_den() : -q.get_den());
  mpz_tdiv_q(rounded.get_mpz_t(), twice.get_mpz_t(), mpz_class(2 * q.get_den()).get_mpz_t());
  bool negative = rounded < 0;
  if (negative) rounded = -rounded;
  std::string s = rounded.get_str();
  if (digits > 0) {
    if (s.size() <= static_cast<std::size_t>(digits)) s.insert(0, digits + 1 - s.size(), '0');
    s.insert(s.size() - digits, ".");
  }
  return negative ? "-" + s : s;
}

Rational round_down(const Rational& q, unsigned bits) {
  mpz_class scaled = q.get_num();
  mpz_mul_2exp(scaled.get_mpz_t(), scaled.get_mpz_t(), bits);
  mpz_class floor;
  mpz_fdiv_q(floor.get_mpz_t(), scaled.get_mpz_t(), q.get_den().get_mpz_t());
  mpz_class den(1);
  mpz_mul_2exp(den.get_mpz_t(), den.get_mpz_t(), bits);
  Rational r(floor, den);
  r.canonicalize();
  return r;
}

Rational round_up(const Rational& q, unsigned bits) {
  mpz_class scaled = q.get_num();
  mpz_mul_2exp(scaled.get_mpz_t(), scaled.get_mpz_t(), bits);
  mpz_class ceil;
  mpz_cdiv_q(ceil.get_mpz_t(), scaled.get_mpz_t(), q.get_den().get_mpz_t());
  mpz_class den(1);
  mpz_mul_2exp(den.get_mpz_t(), den.get_mpz_t(), bits);
  Rational r(ceil, den);
  r.canonicalize();
  return r;
}

std::size_t denominator_bits(const Rational& q) {
  return mpz_sizeinbase(q.get_den().get_mpz_t(), 2);
}

unsigned bits_for(const Rational& eps) {
  if (eps <= 0) throw Error("precision must be positive");
  unsigned bits = 0;
  Rational step(1);
  while (step > eps) {
    step /= 2;
    ++bits;
  }
  return bits;
}

Interval hull(const Interval& a, const Interval& b) {
  return {a.lo < b.lo ? a.lo : b.lo, a.hi > b.hi ? a.hi : b.hi};
}

}  // namespace pregma
