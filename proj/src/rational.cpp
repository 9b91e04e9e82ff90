#include "aceei/rational.hpp"

#include <cctype>

namespace aceei {

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

mpz_class parse_integer(std::string_view s, std::string_view whole) {
  bool negative = false;
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }
  if (!all_digits(s)) throw RationalParseError("malformed rational: '" + std::string(whole) + "'");
  mpz_class z(std::string(s), 10);
  return negative ? mpz_class(-z) : z;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  if (text.empty()) throw RationalParseError("empty rational");

  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    mpz_class num = parse_integer(text.substr(0, slash), text);
    std::string_view den_text = text.substr(slash + 1);
    if (!all_digits(den_text)) throw RationalParseError("malformed rational: '" + std::string(text) + "'");
    mpz_class den(std::string(den_text), 10);
    if (den == 0) throw RationalParseError("zero denominator: '" + std::string(text) + "'");
    Rational r(num, den);
    r.canonicalize();
    return r;
  }

  if (auto dot = text.find('.'); dot != std::string_view::npos) {
    std::string_view int_part = text.substr(0, dot);
    std::string_view frac_part = text.substr(dot + 1);
    bool negative = !int_part.empty() && int_part.front() == '-';
    if (!int_part.empty() && (int_part.front() == '-' || int_part.front() == '+')) int_part.remove_prefix(1);
    if ((!int_part.empty() && !all_digits(int_part)) || !all_digits(frac_part)) {
      throw RationalParseError("malformed rational: '" + std::string(text) + "'");
    }
    mpz_class whole = int_part.empty() ? mpz_class(0) : mpz_class(std::string(int_part), 10);
    mpz_class frac(std::string(frac_part), 10);
    mpz_class scale;
    mpz_ui_pow_ui(scale.get_mpz_t(), 10, frac_part.size());
    Rational r(whole * scale + frac, scale);
    r.canonicalize();
    return negative ? Rational(-r) : r;
  }

  return Rational(parse_integer(text, text));
}

std::string to_string(const Rational& value) {
  return value.get_num().get_str() + "/" + value.get_den().get_str();
}

std::string to_decimal(const Rational& value, int digits) {
  mpf_class f(value, 256);
  mp_exp_t exp = 0;
  std::string mantissa = f.get_str(exp, 10, static_cast<std::size_t>(digits + 8));
  bool negative = !mantissa.empty() && mantissa.front() == '-';
  if (negative) mantissa.erase(0, 1);
  if (mantissa.empty()) return "0";
  std::string out;
  if (exp <= 0) {
    out = "0." + std::string(static_cast<std::size_t>(-exp), '0') + mantissa;
  } else if (static_cast<std::size_t>(exp) >= mantissa.size()) {
    out = mantissa + std::string(static_cast<std::size_t>(exp) - mantissa.size(), '0');
  } else {
    out = mantissa.substr(0, static_cast<std::size_t>(exp)) + "." + mantissa.substr(static_cast<std::size_t>(exp));
  }
  if (auto dot = out.find('.'); dot != std::string::npos) {
    if (out.size() > dot + 1 + static_cast<std::size_t>(digits)) out.resize(dot + 1 + static_cast<std::size_t>(digits));
    while (out.back() == '0') out.pop_back();
    if (out.back() == '.') out.pop_back();
  }
  return negative ? "-" + out : out;
}

double to_double(const Rational& value) { return value.get_d(); }

Rational pow(const Rational& base, unsigned long exponent) {
  mpz_class num, den;
  mpz_pow_ui(num.get_mpz_t(), base.get_num().get_mpz_t(), exponent);
  mpz_pow_ui(den.get_mpz_t(), base.get_den().get_mpz_t(), exponent);
  Rational r(num, den);
  r.canonicalize();
  return r;
}

Rational floor_to_multiple(const Rational& value, const Rational& step) {
  Rational q = value / step;
  mpz_class f;
  mpz_fdiv_q(f.get_mpz_t(), q.get_num().get_mpz_t(), q.get_den().get_mpz_t());
  return Rational(f) * step;
}

Rational ceil_to_multiple(const Rational& value, const Rational& step) {
  Rational q = value / step;
  mpz_class c;
  mpz_cdiv_q(c.get_mpz_t(), q.get_num().get_mpz_t(), q.get_den().get_mpz_t());
  return Rational(c) * step;
}

Rational round_to_multiple(const Rational& value, const Rational& step) {
  Rational lo = floor_to_multiple(value, step);
  Rational hi = lo + step;
  return (value - lo < hi - value) ? lo : hi;
}

bool is_integer(const Rational& value) { return value.get_den() == 1; }

bool exact_sqrt(const Rational& value, Rational& root) {
  if (value < 0) return false;
  if (!mpz_perfect_square_p(value.get_num().get_mpz_t()) || !mpz_perfect_square_p(value.get_den().get_mpz_t())) {
    return false;
  }
  mpz_class n, d;
  mpz_sqrt(n.get_mpz_t(), value.get_num().get_mpz_t());
  mpz_sqrt(d.get_mpz_t(), value.get_den().get_mpz_t());
  root = Rational(n, d);
  root.canonicalize();
  return true;
}

}  // namespace aceei
