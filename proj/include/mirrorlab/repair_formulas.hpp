#pragma once

// Closed-form MTTDL expressions for repairable arrays, CTMC templates keyed
// by name, and reliability of two-level (nested) arrays.

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mirrorlab/errors.hpp"
#include "mirrorlab/markov.hpp"
#include "mirrorlab/polynomial.hpp"
#include "mirrorlab/rational.hpp"
#include "mirrorlab/reliability.hpp"

namespace mirrorlab {

// Times in hours. Fields not used by a formula may stay empty.
struct RepairParams {
  std::optional<Rational> mttf;
  std::optional<Rational> mttr;
  std::optional<int> disks;
  std::optional<int> k;
  std::optional<int> spares;
  std::optional<Rational> p_uf;
  std::optional<int> m;
  // placement formulas
  std::optional<int> nodes;
  std::optional<Rational> capacity;
  std::optional<Rational> bandwidth;
  std::optional<int> replication;
  // controller chains
  std::optional<Rational> lambda_d;
  std::optional<Rational> mu_d;
  std::optional<Rational> lambda_c;
  std::optional<Rational> mu_c;
};

struct ClosedFormResult {
  std::string formula_id;
  Rational value;
  std::optional<Rational> corrected;
  std::optional<Rational> approximation;
  std::string note;
};

namespace detail {

template <typename T>
const T& need(const std::optional<T>& v, const char* name) {
  if (!v) throw ValidationError(std::string("params.") + name, "missing");
  return *v;
}

inline Rational need_positive(const std::optional<Rational>& v, const char* name) {
  const Rational& x = need(v, name);
  if (x <= 0) throw ValidationError(std::string("params.") + name, "must be positive");
  return x;
}

inline int need_int(const std::optional<int>& v, const char* name, int min) {
  const int x = need(v, name);
  if (x < min) throw ValidationError(std::string("params.") + name, "must be at least " + std::to_string(min));
  return x;
}

}  // namespace detail

inline const std::vector<std::string>& closed_form_ids() {
  static const std::vector<std::string> ids = {"raid5_inf",    "raidk",       "angus",       "dholakia",
                                               "spares_k",     "raid51_direct", "raid51_hier", "zurich_cp",
                                               "zurich_dp",    "eafdl_cp",    "eafdl_dp"};
  return ids;
}

// Evaluates a printed formula verbatim. `corrected` is filled where the
// printed form does not follow from its own derivation.
inline ClosedFormResult mttdl_closed_form(std::string_view id, const RepairParams& p) {
  using detail::need_int;
  using detail::need_positive;
  ClosedFormResult r;
  r.formula_id = std::string(id);

  if (id == "raid5_inf") {
    const Rational f = need_positive(p.mttf, "mttf");
    const Rational t = need_positive(p.mttr, "mttr");
    const int n = need_int(p.disks, "disks", 2);
    r.value = f * f / (t * n * (n - 1));
    return r;
  }
  if (id == "raidk") {
    const Rational f = need_positive(p.mttf, "mttf");
    const Rational t = need_positive(p.mttr, "mttr");
    const int n = need_int(p.disks, "disks", 2);
    const int k = need_int(p.k, "k", 1);
    if (k >= n) throw ValidationError("params.k", "must be below disks");
    const auto kk = static_cast<unsigned>(k);
    r.value = pow(f, kk + 1) * (n - k - 1) / (Rational(factorial(n)) * pow(t, kk));
    BigInt falling = 1;
    for (int i = 0; i <= k; ++i) falling *= n - i;
    r.corrected = pow(f, kk + 1) / (Rational(falling) * pow(t, kk));
    r.note = "printed (N-k-1)/N! denominator; corrected uses N(N-1)...(N-k)";
    return r;
  }
  if (id == "angus") {
    const Rational f = need_positive(p.mttf, "mttf");
    const Rational t = need_positive(p.mttr, "mttr");
    const int n = need_int(p.disks, "disks", 2);
    const int k = need_int(p.k, "k", 1);
    if (k >= n) throw ValidationError("params.k", "must be below disks");
    const auto kk = static_cast<unsigned>(k);
    const Rational lead = pow(f, kk + 1) / (Rational(BigInt(binomial(n, k))) * (n - k) * pow(t, kk));
    Rational sum = 0;
    for (int i = 0; i <= k; ++i) sum += Rational(BigInt(binomial(n, i))) * pow(t / f, static_cast<unsigned>(i));
    r.value = lead * sum;
    r.approximation = lead;
    return r;
  }
  if (id == "dholakia") {
    const Rational delta = 1 / need_positive(p.mttf, "mttf");
    const Rational mu = 1 / need_positive(p.mttr, "mttr");
    const int n = need_int(p.disks, "disks", 2);
    const Rational puf = detail::need(p.p_uf, "p_uf");
    if (puf < 0 || puf > 1) throw ValidationError("params.p_uf", "must lie in [0, 1]");
    r.value = (delta * (2 * n - 1) + mu) / (delta * n * (delta * (n - 1) + mu * puf));
    r.note = "equals the exact RAID5 chain at p_uf = 0";
    return r;
  }
  if (id == "spares_k") {
    const Rational delta = 1 / need_positive(p.mttf, "mttf");
    const Rational mu = 1 / need_positive(p.mttr, "mttr");
    const int n = need_int(p.disks, "disks", 2);
    const int k = need_int(p.spares, "spares", 0);
    if (n - 1 - k < 1) throw ValidationError("params.spares", "must be at most disks - 2");
    const Rational q = mu / (mu + delta * (n - 1));
    Rational sum = 1 / (delta * n);
    for (int i = 0; i <= k; ++i) sum += pow(q, static_cast<unsigned>(i)) / (delta * (n - 1 - i));
    r.value = sum;
    if (k == 1) r.approximation = (2 + q) / (delta * n);
    return r;
  }
  if (id == "raid51_direct" || id == "raid51_hier") {
    const Rational f = need_positive(p.mttf, "mttf");
    const Rational t = need_positive(p.mttr, "mttr");
    const int m = need_int(p.m, "m", 2);
    const int c = id == "raid51_direct" ? 3 : 4;
    r.value = pow(f, 4) / (pow(t, 3) * c * m * (m - 1));
    if (id == "raid51_hier") {
      // Mirror of two RAID5 units, each with MTTF^2/(M(M-1)MTTR).
      const Rational unit = f * f / (t * m * (m - 1));
      r.corrected = unit * unit / (2 * t);
      r.note = "composition of the two stated sub-formulas";
    }
    return r;
  }
  if (id == "zurich_cp" || id == "zurich_dp" || id == "eafdl_cp" || id == "eafdl_dp") {
    const Rational delta = 1 / need_positive(p.mttf, "mttf");
    const int n = need_int(p.nodes, "nodes", 2);
    const Rational c = need_positive(p.capacity, "capacity");
    const Rational b = need_positive(p.bandwidth, "bandwidth");
    const int rep = p.replication.value_or(2);
    if (id == "eafdl_cp") {
      r.value = delta * delta * c / b;
      return r;
    }
    if (id == "eafdl_dp") {
      r.value = delta * delta * c * (n - 1) * 2 / b;
      r.note = "printed 2 delta^2 c (n-1) b, read with b in the denominator";
      return r;
    }
    if (rep == 2) {
      r.value = id == "zurich_cp" ? b / (delta * delta * c * n) : b / (delta * delta * c * n * 2);
    } else if (rep == 3) {
      r.value = id == "zurich_cp" ? b * b / (pow(delta, 3) * c * c * n)
                                  : b * b * (n - 1) / (pow(delta, 3) * c * c * n * 4);
    } else {
      throw ValidationError("params.replication", "must be 2 or 3");
    }
    return r;
  }
  throw ValidationError("formula", "unknown formula id '" + std::string(id) + "'");
}

// CTMC templates by name.
inline MarkovModel build_model(std::string_view name, const RepairParams& p) {
  using detail::need_int;
  using detail::need_positive;
  if (name == "raid5_repair") {
    return raid5_repair_model(need_int(p.disks, "disks", 2), 1 / need_positive(p.mttf, "mttf"),
                              1 / need_positive(p.mttr, "mttr"));
  }
  if (name == "sspiral_443") {
    return sspiral_443_model(1 / need_positive(p.mttf, "mttf"), 1 / need_positive(p.mttr, "mttr"));
  }
  if (name == "controller_c1" || name == "controller_c2" || name == "controller_c3") {
    const ControllerRates c{need_positive(p.lambda_d, "lambda_d"), need_positive(p.mu_d, "mu_d"),
                            need_positive(p.lambda_c, "lambda_c"), need_positive(p.mu_c, "mu_c")};
    if (name == "controller_c1") return controller_c1_model(c);
    if (name == "controller_c2") return controller_c2_model(c);
    return controller_c3_model(c);
  }
  if (name == "raidk_repair" || name == "raidk_parallel") {
    const int n = need_int(p.disks, "disks", 2);
    const int k = need_int(p.k, "k", 1);
    if (k >= n) throw ValidationError("params.k", "must be below disks");
    return profile_repair_model(mds_profile(n, k), 1 / need_positive(p.mttf, "mttf"),
                                1 / need_positive(p.mttr, "mttr"),
                                name == "raidk_repair" ? RepairPolicy::single : RepairPolicy::parallel);
  }
  throw ValidationError("template", "unknown model template '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Nested arrays

enum class LevelKind { raid1, raid5 };

// Reliability of one level as a polynomial in the reliability x of its units:
// a mirrored pair 2x - x^2, a RAID5 of M units x^M + M x^(M-1) (1 - x).
inline Polynomial<Rational> level_polynomial(LevelKind kind, int m) {
  using P = Polynomial<Rational>;
  const P x = P::monomial(1, 1);
  if (kind == LevelKind::raid1) return x * Rational(2) - x * x;
  if (m < 2) throw ValidationError("m", "RAID5 level needs at least two units");
  return x.pow(static_cast<unsigned>(m)) +
         x.pow(static_cast<unsigned>(m - 1)) * P::one_minus_x() * Rational(m);
}

struct MultilevelResult {
  Polynomial<Rational> reliability;  // in disk reliability r
  EpsilonTerm leading;
  std::optional<EpsilonTerm> printed;
};

// outer(inner(r)): e.g. outer raid1 over inner raid5 is the mirror of two
// RAID5 arrays.
inline MultilevelResult multilevel(LevelKind outer, LevelKind inner, int m) {
  MultilevelResult res;
  res.reliability = level_polynomial(outer, m).compose(level_polynomial(inner, m));
  const auto q = unreliability_polynomial(res.reliability);
  const std::size_t low = q.lowest_degree();
  res.leading = {static_cast<unsigned>(low), q.coefficient(low)};
  if (outer == LevelKind::raid1 && inner == LevelKind::raid5) {
    res.printed = EpsilonTerm{3, Rational(m) * m * m};
  } else if (outer == LevelKind::raid5 && inner == LevelKind::raid1) {
    res.printed = EpsilonTerm{4, Rational(m) * (m - 1)};
  }
  return res;
}

template <typename T>
T multilevel_reliability(LevelKind outer, LevelKind inner, int m, const T& r) {
  if (r < T(0) || r > T(1)) throw ConstraintError("reliability must lie in [0, 1]");
  return multilevel(outer, inner, m).reliability(r);
}

}  // namespace mirrorlab
