#pragma once

// Survivor profiles A(N,i) and the no-repair reliability quantities derived
// from them.

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <type_traits>
#include <vector>

#include <json.hpp>

#include "mirrorlab/errors.hpp"
#include "mirrorlab/layout.hpp"
#include "mirrorlab/polynomial.hpp"
#include "mirrorlab/rational.hpp"

namespace mirrorlab {

class SurvivorProfile {
 public:
  SurvivorProfile() = default;
  // counts[i] = A(N,i); missing trailing entries are zero.
  SurvivorProfile(int disks, std::vector<std::uint64_t> counts) : n_(disks), a_(std::move(counts)) {
    if (n_ < 1 || n_ > 64) throw ConstraintError("profile disk count must be in [1, 64]");
    if (a_.size() > static_cast<std::size_t>(n_) + 1) throw ConstraintError("profile longer than N+1");
    a_.resize(static_cast<std::size_t>(n_) + 1, 0);
    if (a_[0] != 1) throw ConstraintError("A(N,0) must be 1");
    for (int i = 0; i <= n_; ++i) {
      if (a_[static_cast<std::size_t>(i)] > binomial(n_, i)) throw ConstraintError("A(N,i) exceeds C(N,i)");
      if (a_[static_cast<std::size_t>(i)] > 0) top_ = i;
    }
  }

  int disks() const noexcept { return n_; }
  // I: largest i with A(N,i) > 0.
  int max_tolerated() const noexcept { return top_; }
  const std::vector<std::uint64_t>& counts() const noexcept { return a_; }
  std::uint64_t count(int i) const {
    return (i < 0 || i > n_) ? 0 : a_[static_cast<std::size_t>(i)];
  }

  // v_i = A(N,i) / C(N,i).
  Rational visit_probability(int i) const {
    if (i < 0 || i > n_) return 0;
    return Rational(BigInt(count(i)), BigInt(binomial(n_, i)));
  }

  // Same profile with every level above `level` treated as data loss.
  SurvivorProfile truncated(int level) const {
    std::vector<std::uint64_t> a = a_;
    for (int i = level + 1; i <= n_; ++i) a[static_cast<std::size_t>(i)] = 0;
    return SurvivorProfile(n_, std::move(a));
  }

  friend bool operator==(const SurvivorProfile&, const SurvivorProfile&) = default;

 private:
  int n_ = 1;
  std::vector<std::uint64_t> a_{1, 0};
  int top_ = 0;
};

inline SurvivorProfile mds_profile(int disks, int k) {
  std::vector<std::uint64_t> a;
  for (int i = 0; i <= std::min(k, disks); ++i) a.push_back(binomial(disks, i));
  return SurvivorProfile(disks, std::move(a));
}

inline SurvivorProfile single_disk_profile() { return SurvivorProfile(1, {1, 0}); }

// Closed-form A(N,i) where one is known.
inline std::optional<SurvivorProfile> closed_form_profile(const LayoutSpec& spec) {
  const int n = spec.disks;
  std::vector<std::uint64_t> a(static_cast<std::size_t>(n) + 1, 0);
  a[0] = 1;
  switch (spec.kind) {
    case LayoutKind::bm:
    case LayoutKind::nway: {
      const int r = spec.kind == LayoutKind::bm ? 2 : spec.param;
      if (r < 2 || n % r != 0) return std::nullopt;
      const int groups = n / r;
      // Inclusion-exclusion over groups that are wiped out completely.
      for (int i = 1; i <= n; ++i) {
        __int128 total = 0;
        for (int j = 0; j <= groups && j * r <= i; ++j) {
          const __int128 term = static_cast<__int128>(binomial(groups, j)) * binomial(n - j * r, i - j * r);
          total += (j % 2 == 0) ? term : -term;
        }
        a[static_cast<std::size_t>(i)] = static_cast<std::uint64_t>(total);
      }
      break;
    }
    case LayoutKind::grd: {
      if (n % 2 != 0) return std::nullopt;
      for (int i = 1; i <= n / 2; ++i) a[static_cast<std::size_t>(i)] = 2 * binomial(n / 2, i);
      break;
    }
    case LayoutKind::id: {
      const int c = spec.param;
      if (c < 1 || n % c != 0 || n / c < 2) return std::nullopt;
      std::uint64_t pw = 1;
      for (int i = 1; i <= c; ++i) {
        pw *= static_cast<std::uint64_t>(n / c);
        a[static_cast<std::size_t>(i)] = binomial(c, i) * pw;
      }
      break;
    }
    case LayoutKind::cd: {
      if (n < 3) return std::nullopt;
      // Non-adjacent i-subsets of a ring of n.
      for (int i = 1; 2 * i <= n; ++i) {
        a[static_cast<std::size_t>(i)] = binomial(n - i, i) * static_cast<std::uint64_t>(n) /
                                         static_cast<std::uint64_t>(n - i);
      }
      break;
    }
    case LayoutKind::raidk: {
      if (spec.param < 1 || spec.param >= n) return std::nullopt;
      return mds_profile(n, spec.param);
    }
    default:
      return std::nullopt;
  }
  return SurvivorProfile(n, std::move(a));
}

// Enumerates A(N,i) level by level and stops at the first level with no
// survivable set: every superset of a fatal set is fatal.
inline SurvivorProfile enumerate_profile(const Layout& layout,
                                         std::uint64_t budget = kDefaultEnumerationBudget) {
  std::vector<std::uint64_t> a{1};
  for (int i = 1; i <= layout.max_tolerable(); ++i) {
    const std::uint64_t c = count_survivable(layout, i, budget);
    if (c == 0) break;
    a.push_back(c);
  }
  return SurvivorProfile(layout.disks(), std::move(a));
}

// Enumeration when affordable, closed form otherwise. When both are
// available they must agree.
inline SurvivorProfile survivor_profile(const Layout& layout,
                                        std::uint64_t budget = kDefaultEnumerationBudget) {
  const auto closed = closed_form_profile(layout.spec());
  try {
    SurvivorProfile counted = enumerate_profile(layout, budget);
    if (closed && !(*closed == counted)) {
      throw Error("enumerated profile disagrees with closed form for " + display_name(layout.spec()));
    }
    return counted;
  } catch (const BudgetExceeded&) {
    if (closed) return *closed;
    throw;
  }
}

inline SurvivorProfile survivor_profile(const LayoutSpec& spec,
                                        std::uint64_t budget = kDefaultEnumerationBudget) {
  if (auto closed = closed_form_profile(spec); closed && spec.disks > 24) return *closed;
  return survivor_profile(build_layout(spec), budget);
}

// R(r) = sum_i A(N,i) r^(N-i) (1-r)^i as a polynomial in r.
inline Polynomial<Rational> reliability_polynomial(const SurvivorProfile& p) {
  using P = Polynomial<Rational>;
  P out;
  const P r = P::monomial(1, 1);
  const P q = P::one_minus_x();
  for (int i = 0; i <= p.max_tolerated(); ++i) {
    out += r.pow(static_cast<unsigned>(p.disks() - i)) * q.pow(static_cast<unsigned>(i)) *
           Rational(BigInt(p.count(i)));
  }
  return out;
}

// Q(eps) = 1 - R(1 - eps).
inline Polynomial<Rational> unreliability_polynomial(const Polynomial<Rational>& reliability) {
  using P = Polynomial<Rational>;
  return P::constant(1) - reliability.compose(P::one_minus_x());
}

inline Polynomial<Rational> unreliability_polynomial(const SurvivorProfile& p) {
  return unreliability_polynomial(reliability_polynomial(p));
}

// Exact for Rational, plain evaluation for double.
template <typename T>
T reliability(const SurvivorProfile& p, const T& r) {
  T sum = T(0);
  const T q = T(1) - r;
  for (int i = 0; i <= p.max_tolerated(); ++i) {
    T term(1);
    for (int j = 0; j < p.disks() - i; ++j) term *= r;
    for (int j = 0; j < i; ++j) term *= q;
    sum += term * T(static_cast<long long>(p.count(i)));
  }
  return sum;
}

// 1 - R as a sum of nonnegative terms, accurate for eps near 0.
inline double unreliability(const SurvivorProfile& p, double eps) {
  double sum = 0;
  for (int i = 0; i <= p.disks(); ++i) {
    const double lost = static_cast<double>(binomial(p.disks(), i)) - static_cast<double>(p.count(i));
    if (lost == 0) continue;
    sum += lost * std::pow(eps, i) * std::pow(1.0 - eps, p.disks() - i);
  }
  return sum;
}

// Reliability at time t with exponential disk lifetimes of rate delta.
inline double reliability_at(const SurvivorProfile& p, double delta, double t) {
  return 1.0 - unreliability(p, -std::expm1(-delta * t));
}

// MTTDL * delta = sum_i v_i / (N - i).
inline Rational mttdl_factor(const SurvivorProfile& p) {
  Rational sum = 0;
  for (int i = 0; i <= p.max_tolerated(); ++i) {
    sum += p.visit_probability(i) / (p.disks() - i);
  }
  return sum;
}

inline Rational mttdl_no_repair(const SurvivorProfile& p, const Rational& delta) {
  if (delta <= 0) throw ConstraintError("failure rate must be positive");
  return mttdl_factor(p) / delta;
}

inline double mttdl_no_repair(const SurvivorProfile& p, double delta) {
  if (!(delta > 0)) throw ConstraintError("failure rate must be positive");
  return to_double(mttdl_factor(p)) / delta;
}

struct EpsilonTerm {
  unsigned exponent = 0;
  Rational coefficient;
};

struct EpsilonExpansion {
  std::optional<EpsilonTerm> leading;
  std::optional<EpsilonTerm> next;
};

// Lowest two terms of 1 - R(1 - eps).
inline EpsilonExpansion epsilon_expansion(const SurvivorProfile& p) {
  const auto q = unreliability_polynomial(p);
  EpsilonExpansion e;
  const auto& c = q.coefficients();
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (c[i] == 0) continue;
    if (!e.leading) {
      e.leading = EpsilonTerm{static_cast<unsigned>(i), c[i]};
    } else {
      e.next = EpsilonTerm{static_cast<unsigned>(i), c[i]};
      break;
    }
  }
  return e;
}

inline std::string to_string(const EpsilonTerm& t) {
  return to_string(t.coefficient) + "*eps^" + std::to_string(t.exponent);
}

// sum_i v_i T_i / ((N - i) delta): expected work done before data loss.
template <typename T>
T performability(const SurvivorProfile& p, const std::vector<T>& throughput, const T& delta) {
  if (!(delta > T(0))) throw ConstraintError("failure rate must be positive");
  if (throughput.size() < static_cast<std::size_t>(p.max_tolerated()) + 1) {
    throw ConstraintError("throughput needed for every level 0..I");
  }
  T sum = T(0);
  for (int i = 0; i <= p.max_tolerated(); ++i) {
    if (throughput[static_cast<std::size_t>(i)] < T(0)) throw ConstraintError("negative throughput");
    T v;
    if constexpr (std::is_same_v<T, Rational>) {
      v = p.visit_probability(i);
    } else {
      v = static_cast<T>(to_double(p.visit_probability(i)));
    }
    sum += v * throughput[static_cast<std::size_t>(i)] / (T(p.disks() - i) * delta);
  }
  return sum;
}

namespace detail {

// Smallest t in (0, t_max] where g changes sign: a fixed grid locates the
// bracket, bisection refines it.
inline std::optional<double> first_root(const std::function<double(double)>& g, double t_max) {
  constexpr int kGrid = 10000;
  double prev_t = 0;
  double prev = g(t_max / kGrid * 1e-3);
  for (int k = 1; k <= kGrid; ++k) {
    const double t = t_max * k / kGrid;
    const double v = g(t);
    if (v == 0) return t;
    if (prev != 0 && (v > 0) != (prev > 0)) {
      double lo = prev_t;
      double hi = t;
      double glo = prev;
      while (hi - lo > 1e-12 * hi) {
        const double mid = 0.5 * (lo + hi);
        const double gm = g(mid);
        if (gm == 0) return mid;
        if ((gm > 0) == (glo > 0)) {
          lo = mid;
          glo = gm;
        } else {
          hi = mid;
        }
      }
      return 0.5 * (lo + hi);
    }
    prev = v;
    prev_t = t;
  }
  return std::nullopt;
}

}  // namespace detail

// Smallest t > 0 where the two reliability curves cross, searched over
// (0, horizon/delta].
inline std::optional<double> crossover_time(const SurvivorProfile& a, const SurvivorProfile& b,
                                            double delta, double horizon = 10.0) {
  if (!(delta > 0)) throw ConstraintError("failure rate must be positive");
  if (reliability_polynomial(a) == reliability_polynomial(b)) return std::nullopt;
  // Unreliabilities while small, reliabilities once small: no cancellation at either end.
  auto g = [&](double t) {
    const double eps = -std::expm1(-delta * t);
    if (eps < 0.5) return unreliability(b, eps) - unreliability(a, eps);
    return reliability(a, 1 - eps) - reliability(b, 1 - eps);
  };
  return detail::first_root(g, horizon / delta);
}

// Same search on reliability polynomials in r.
inline std::optional<double> crossover_time(const Polynomial<Rational>& a, const Polynomial<Rational>& b,
                                            double delta, double horizon = 10.0) {
  if (!(delta > 0)) throw ConstraintError("failure rate must be positive");
  const auto diff = unreliability_polynomial(b) - unreliability_polynomial(a);
  if (diff.is_zero()) return std::nullopt;
  std::vector<double> c;
  for (const auto& x : diff.coefficients()) c.push_back(to_double(x));
  const Polynomial<double> d(std::move(c));
  auto g = [&](double t) { return d(-std::expm1(-delta * t)); };
  return detail::first_root(g, horizon / delta);
}

inline nlohmann::json to_json(const SurvivorProfile& p) {
  nlohmann::json j;
  j["disks"] = p.disks();
  j["max_tolerated"] = p.max_tolerated();
  j["counts"] = p.counts();
  return j;
}

inline nlohmann::json to_json(const Polynomial<Rational>& poly) {
  auto arr = nlohmann::json::array();
  for (const auto& c : poly.coefficients()) arr.push_back(to_string(c));
  return arr;
}

}  // namespace mirrorlab
