#pragma once

#include <algorithm>
#include <cstddef>
#include <initializer_list>
#include <utility>
#include <vector>

namespace mirrorlab {

// Dense univariate polynomial, coefficient i multiplies x^i.
template <typename T>
class Polynomial {
 public:
  Polynomial() = default;
  Polynomial(std::initializer_list<T> coeffs) : c_(coeffs) { trim(); }
  explicit Polynomial(std::vector<T> coeffs) : c_(std::move(coeffs)) { trim(); }

  static Polynomial constant(T v) { return Polynomial(std::vector<T>{std::move(v)}); }
  static Polynomial monomial(T coeff, std::size_t degree) {
    std::vector<T> c(degree + 1, T(0));
    c[degree] = std::move(coeff);
    return Polynomial(std::move(c));
  }
  // 1 - x, the substitution r = 1 - eps.
  static Polynomial one_minus_x() { return Polynomial{T(1), T(-1)}; }

  bool is_zero() const { return c_.empty(); }
  // Degree of the zero polynomial is reported as 0.
  std::size_t degree() const { return c_.empty() ? 0 : c_.size() - 1; }
  const std::vector<T>& coefficients() const { return c_; }

  T coefficient(std::size_t i) const { return i < c_.size() ? c_[i] : T(0); }

  // Lowest power with a nonzero coefficient; degree() for the zero polynomial.
  std::size_t lowest_degree() const {
    for (std::size_t i = 0; i < c_.size(); ++i) {
      if (c_[i] != T(0)) return i;
    }
    return degree();
  }

  template <typename U>
  U operator()(const U& x) const {
    U acc = U(0);
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * x + U(*it);
    return acc;
  }

  Polynomial& operator+=(const Polynomial& o) {
    if (o.c_.size() > c_.size()) c_.resize(o.c_.size(), T(0));
    for (std::size_t i = 0; i < o.c_.size(); ++i) c_[i] += o.c_[i];
    trim();
    return *this;
  }
  Polynomial& operator-=(const Polynomial& o) {
    if (o.c_.size() > c_.size()) c_.resize(o.c_.size(), T(0));
    for (std::size_t i = 0; i < o.c_.size(); ++i) c_[i] -= o.c_[i];
    trim();
    return *this;
  }
  Polynomial& operator*=(const T& s) {
    for (auto& v : c_) v *= s;
    trim();
    return *this;
  }

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(Polynomial a, const T& s) { return a *= s; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    if (a.is_zero() || b.is_zero()) return {};
    std::vector<T> out(a.c_.size() + b.c_.size() - 1, T(0));
    for (std::size_t i = 0; i < a.c_.size(); ++i) {
      for (std::size_t j = 0; j < b.c_.size(); ++j) out[i + j] += a.c_[i] * b.c_[j];
    }
    return Polynomial(std::move(out));
  }
  friend bool operator==(const Polynomial& a, const Polynomial& b) { return a.c_ == b.c_; }

  Polynomial pow(unsigned e) const {
    Polynomial result = constant(T(1));
    Polynomial base = *this;
    while (e != 0) {
      if (e & 1u) result = result * base;
      base = base * base;
      e >>= 1u;
    }
    return result;
  }

  // this(inner(x))
  Polynomial compose(const Polynomial& inner) const {
    Polynomial acc;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * inner + constant(*it);
    return acc;
  }

 private:
  void trim() {
    while (!c_.empty() && c_.back() == T(0)) c_.pop_back();
  }

  std::vector<T> c_;
};

}  // namespace mirrorlab
