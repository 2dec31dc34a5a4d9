#pragma once

// Exact arithmetic helpers built on Boost.Multiprecision.

#include <boost/multiprecision/cpp_int.hpp>

#include <cctype>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <sstream>
#include <string>
#include <string_view>

#include "mirrorlab/errors.hpp"

namespace mirrorlab {

using BigInt = boost::multiprecision::number<boost::multiprecision::cpp_int_backend<>,
                                             boost::multiprecision::et_off>;
using Rational = boost::multiprecision::number<boost::multiprecision::cpp_rational_backend,
                                               boost::multiprecision::et_off>;

inline Rational make_rational(const BigInt& num, const BigInt& den) {
  return Rational(num, den);
}

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

inline Rational pow(const Rational& base, unsigned exponent) {
  Rational result = 1;
  Rational b = base;
  while (exponent != 0) {
    if (exponent & 1u) result *= b;
    b *= b;
    exponent >>= 1u;
  }
  return result;
}

// C(n, k) for n <= 64 fits in 64 bits; the 128-bit intermediate keeps the
// running product exact.
inline std::uint64_t binomial(int n, int k) {
  if (k < 0 || n < 0 || k > n) return 0;
  if (k > n - k) k = n - k;
  unsigned __int128 acc = 1;
  for (int j = 1; j <= k; ++j) {
    acc = acc * static_cast<unsigned>(n - k + j) / static_cast<unsigned>(j);
  }
  return static_cast<std::uint64_t>(acc);
}

inline BigInt factorial(int n) {
  BigInt f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// "p/q", or "p" when the denominator is one.
inline std::string to_string(const Rational& r) {
  const BigInt& num = boost::multiprecision::numerator(r);
  const BigInt& den = boost::multiprecision::denominator(r);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

// Decimal with `digits` significant digits, trailing zeros kept so columns
// line up ("0.58214", "1.7857e+09").
inline std::string format_sig(double value, int digits = 5) {
  std::ostringstream os;
  const double mag = value == 0.0 ? 0.0 : std::floor(std::log10(std::fabs(value)));
  if (value != 0.0 && (mag >= digits || mag < -4)) {
    os << std::scientific << std::setprecision(digits - 1) << value;
  } else {
    const int decimals = std::max(0, digits - 1 - static_cast<int>(mag));
    os << std::fixed << std::setprecision(decimals) << value;
  }
  return os.str();
}

namespace detail {

inline BigInt parse_digits(std::string_view s, const std::string& context) {
  if (s.empty()) throw ValidationError(context, "empty number");
  BigInt v = 0;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) {
      throw ValidationError(context, "not a number: '" + std::string(s) + "'");
    }
    v = v * 10 + (c - '0');
  }
  return v;
}

inline Rational pow10(long e) {
  Rational p = pow(Rational(10), static_cast<unsigned>(e < 0 ? -e : e));
  return e < 0 ? Rational(1) / p : p;
}

}  // namespace detail

// Parses "p/q", "12", "-0.25", "1e-6", "2.5E3" into an exact rational. The
// decimal forms are read digit by digit, so "0.1" is exactly 1/10.
inline Rational parse_rational(std::string_view text, const std::string& context = "value") {
  std::string s;
  for (char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
  }
  if (s.empty()) throw ValidationError(context, "empty number");
  if (auto slash = s.find('/'); slash != std::string::npos) {
    Rational num = parse_rational(s.substr(0, slash), context);
    Rational den = parse_rational(s.substr(slash + 1), context);
    if (den == 0) throw ValidationError(context, "zero denominator");
    return num / den;
  }
  bool negative = false;
  std::string_view body = s;
  if (body.front() == '+' || body.front() == '-') {
    negative = body.front() == '-';
    body.remove_prefix(1);
  }
  long exponent = 0;
  if (auto e = body.find_first_of("eE"); e != std::string_view::npos) {
    std::string_view exp_part = body.substr(e + 1);
    bool exp_negative = false;
    if (!exp_part.empty() && (exp_part.front() == '+' || exp_part.front() == '-')) {
      exp_negative = exp_part.front() == '-';
      exp_part.remove_prefix(1);
    }
    exponent = detail::parse_digits(exp_part, context).convert_to<long>();
    if (exp_negative) exponent = -exponent;
    body = body.substr(0, e);
  }
  std::string digits;
  if (auto dot = body.find('.'); dot != std::string_view::npos) {
    digits = std::string(body.substr(0, dot)) + std::string(body.substr(dot + 1));
    exponent -= static_cast<long>(body.size() - dot - 1);
  } else {
    digits = std::string(body);
  }
  Rational value = Rational(detail::parse_digits(digits, context)) * detail::pow10(exponent);
  return negative ? -value : value;
}

}  // namespace mirrorlab
