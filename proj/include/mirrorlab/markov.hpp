#pragma once

// Absorbing continuous-time Markov chains for repairable arrays.

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "mirrorlab/errors.hpp"
#include "mirrorlab/rational.hpp"
#include "mirrorlab/reliability.hpp"

namespace mirrorlab {

struct Transition {
  std::size_t from = 0;
  std::size_t to = 0;
  Rational rate;
};

class MarkovModel {
 public:
  MarkovModel(std::vector<std::string> states, std::vector<Transition> transitions,
              std::set<std::size_t> absorbing, std::size_t initial)
      : states_(std::move(states)),
        transitions_(std::move(transitions)),
        absorbing_(std::move(absorbing)),
        initial_(initial) {
    const std::size_t n = states_.size();
    if (n == 0) throw ConstraintError("model has no states");
    if (initial_ >= n) throw ConstraintError("initial state out of range");
    std::set<std::string> seen;
    for (const auto& s : states_) {
      if (!seen.insert(s).second) throw ConstraintError("duplicate state label " + s);
    }
    for (std::size_t a : absorbing_) {
      if (a >= n) throw ConstraintError("absorbing state out of range");
    }
    for (const Transition& t : transitions_) {
      if (t.from >= n || t.to >= n) throw ConstraintError("transition names an unknown state");
      if (t.rate < 0) throw ConstraintError("negative transition rate");
      if (t.from == t.to) throw ConstraintError("self loop on " + states_[t.from]);
      if (absorbing_.count(t.from) != 0 && t.rate != 0) {
        throw ConstraintError("absorbing state " + states_[t.from] + " has an outgoing rate");
      }
    }
  }

  // Transitions given as (from label, to label, rate).
  static MarkovModel from_labels(std::vector<std::string> states,
                                 const std::vector<std::tuple<std::string, std::string, Rational>>& rates,
                                 const std::vector<std::string>& absorbing, const std::string& initial) {
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < states.size(); ++i) index.emplace(states[i], i);
    auto find = [&](const std::string& s) {
      auto it = index.find(s);
      if (it == index.end()) throw ConstraintError("unknown state " + s);
      return it->second;
    };
    std::vector<Transition> ts;
    for (const auto& [from, to, rate] : rates) {
      if (rate != 0) ts.push_back({find(from), find(to), rate});
    }
    std::set<std::size_t> abs;
    for (const auto& a : absorbing) abs.insert(find(a));
    const std::size_t init = find(initial);
    return MarkovModel(std::move(states), std::move(ts), std::move(abs), init);
  }

  const std::vector<std::string>& states() const noexcept { return states_; }
  const std::vector<Transition>& transitions() const noexcept { return transitions_; }
  const std::set<std::size_t>& absorbing() const noexcept { return absorbing_; }
  std::size_t initial() const noexcept { return initial_; }
  bool is_absorbing(std::size_t s) const { return absorbing_.count(s) != 0; }

  std::size_t index_of(const std::string& label) const {
    for (std::size_t i = 0; i < states_.size(); ++i) {
      if (states_[i] == label) return i;
    }
    throw ConstraintError("unknown state " + label);
  }

  Rational rate(const std::string& from, const std::string& to) const {
    const std::size_t f = index_of(from);
    const std::size_t t = index_of(to);
    Rational sum = 0;
    for (const auto& tr : transitions_) {
      if (tr.from == f && tr.to == t) sum += tr.rate;
    }
    return sum;
  }

 private:
  std::vector<std::string> states_;
  std::vector<Transition> transitions_;
  std::set<std::size_t> absorbing_;
  std::size_t initial_;
};

namespace detail {

inline std::vector<bool> reachable_from(const MarkovModel& m, std::size_t start) {
  std::vector<bool> seen(m.states().size(), false);
  std::vector<std::size_t> stack{start};
  seen[start] = true;
  while (!stack.empty()) {
    const std::size_t s = stack.back();
    stack.pop_back();
    for (const auto& t : m.transitions()) {
      if (t.from == s && t.rate > 0 && !seen[t.to]) {
        seen[t.to] = true;
        stack.push_back(t.to);
      }
    }
  }
  return seen;
}

// Solves A x = b exactly by Gauss-Jordan elimination.
inline std::vector<Rational> solve_exact(std::vector<std::vector<Rational>> a, std::vector<Rational> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    while (piv < n && a[piv][col] == 0) ++piv;
    if (piv == n) throw SingularSystem("linear system is singular");
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    const Rational inv = 1 / a[col][col];
    for (std::size_t j = col; j < n; ++j) a[col][j] *= inv;
    b[col] *= inv;
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col || a[r][col] == 0) continue;
      const Rational f = a[r][col];
      for (std::size_t j = col; j < n; ++j) a[r][j] -= f * a[col][j];
      b[r] -= f * b[col];
    }
  }
  return b;
}

inline std::vector<double> solve_float(const std::vector<std::vector<Rational>>& a, const std::vector<Rational>& b) {
  const auto n = static_cast<Eigen::Index>(b.size());
  Eigen::MatrixXd m(n, n);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    v(i) = to_double(b[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = to_double(a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
  if (!lu.isInvertible()) throw SingularSystem("linear system is singular");
  Eigen::VectorXd x = lu.solve(v);
  return {x.data(), x.data() + x.size()};
}

struct MttaSystem {
  std::vector<std::vector<Rational>> a;
  std::vector<Rational> b;
  std::size_t initial_row = 0;
};

// Expected absorption times over the transient states reachable from the
// initial state: (sum of outgoing rates) t_i - sum_j q_ij t_j = 1.
inline MttaSystem mtta_system(const MarkovModel& m) {
  const auto reach = reachable_from(m, m.initial());
  std::vector<std::size_t> transient;
  std::vector<std::size_t> row(m.states().size(), static_cast<std::size_t>(-1));
  bool absorbing_reached = false;
  for (std::size_t s = 0; s < reach.size(); ++s) {
    if (!reach[s]) continue;
    if (m.is_absorbing(s)) {
      absorbing_reached = true;
      continue;
    }
    row[s] = transient.size();
    transient.push_back(s);
  }
  if (!absorbing_reached) throw SingularSystem("no absorbing state is reachable from the initial state");
  for (std::size_t s : transient) {
    const auto from_s = reachable_from(m, s);
    bool ok = false;
    for (std::size_t a : m.absorbing()) ok = ok || from_s[a];
    if (!ok) throw SingularSystem("state " + m.states()[s] + " never reaches absorption");
  }
  if (m.is_absorbing(m.initial())) return {};
  MttaSystem sys;
  const std::size_t n = transient.size();
  sys.a.assign(n, std::vector<Rational>(n, 0));
  sys.b.assign(n, 1);
  for (const auto& t : m.transitions()) {
    if (row[t.from] == static_cast<std::size_t>(-1)) continue;
    sys.a[row[t.from]][row[t.from]] += t.rate;
    if (row[t.to] != static_cast<std::size_t>(-1)) sys.a[row[t.from]][row[t.to]] -= t.rate;
  }
  sys.initial_row = row[m.initial()];
  return sys;
}

}  // namespace detail

inline constexpr std::size_t kExactStateLimit = 50;

// Mean time to absorption, exact.
inline Rational solve_mtta_exact(const MarkovModel& m) {
  auto sys = detail::mtta_system(m);
  if (sys.b.empty()) return 0;
  return detail::solve_exact(std::move(sys.a), std::move(sys.b))[sys.initial_row];
}

// Mean time to absorption. Exact arithmetic up to kExactStateLimit transient
// states, LU in double precision above.
inline double solve_mtta(const MarkovModel& m) {
  auto sys = detail::mtta_system(m);
  if (sys.b.empty()) return 0;
  if (sys.b.size() <= kExactStateLimit) {
    return to_double(detail::solve_exact(std::move(sys.a), std::move(sys.b))[sys.initial_row]);
  }
  return detail::solve_float(sys.a, sys.b)[sys.initial_row];
}

// Long-run fraction of time outside the absorbing states when every
// absorbing state is restored to the initial state at `restore_rate`.
inline Rational availability_exact(const MarkovModel& m, const Rational& restore_rate) {
  if (restore_rate <= 0) throw ConstraintError("restore rate must be positive");
  std::vector<Transition> ts = m.transitions();
  for (std::size_t a : m.absorbing()) ts.push_back({a, m.initial(), restore_rate});
  const MarkovModel closed(m.states(), ts, {}, m.initial());
  const auto reach = detail::reachable_from(closed, closed.initial());
  std::vector<std::size_t> live;
  std::vector<std::size_t> col(m.states().size(), static_cast<std::size_t>(-1));
  for (std::size_t s = 0; s < reach.size(); ++s) {
    if (!reach[s]) continue;
    if (!detail::reachable_from(closed, s)[closed.initial()]) {
      throw SingularSystem("chain is not ergodic: " + m.states()[s] + " cannot return");
    }
    col[s] = live.size();
    live.push_back(s);
  }
  const std::size_t n = live.size();
  // Balance equations pi Q = 0 transposed, last one replaced by sum pi = 1.
  std::vector<std::vector<Rational>> a(n, std::vector<Rational>(n, 0));
  std::vector<Rational> b(n, 0);
  for (const auto& t : ts) {
    if (col[t.from] == static_cast<std::size_t>(-1)) continue;
    a[col[t.to]][col[t.from]] += t.rate;
    a[col[t.from]][col[t.from]] -= t.rate;
  }
  for (std::size_t j = 0; j < n; ++j) a[n - 1][j] = 1;
  b[n - 1] = 1;
  const auto pi = detail::solve_exact(std::move(a), std::move(b));
  Rational up = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!m.is_absorbing(live[i])) up += pi[i];
  }
  return up;
}

// ---------------------------------------------------------------------------
// Templates

struct ControllerRates {
  Rational lambda_d;
  Rational mu_d;
  Rational lambda_c;
  Rational mu_c;
};

namespace detail {

inline void require_positive(const Rational& v, const std::string& name) {
  if (v <= 0) throw ValidationError(name, "must be positive");
}

}  // namespace detail

// RAID5 with N disks: S_N -> S_{N-1} at N delta, S_{N-1} -> S_N at mu,
// S_{N-1} -> S_F at (N-1) delta.
inline MarkovModel raid5_repair_model(int n, const Rational& delta, const Rational& mu) {
  if (n < 2) throw ValidationError("disks", "need at least two disks");
  detail::require_positive(delta, "delta");
  if (mu < 0) throw ValidationError("mu", "must be nonnegative");
  const std::string s0 = "S" + std::to_string(n);
  const std::string s1 = "S" + std::to_string(n - 1);
  return MarkovModel::from_labels({s0, s1, "SF"},
                                  {{s0, s1, delta * n}, {s1, "SF", delta * (n - 1)}, {s1, s0, mu}},
                                  {"SF"}, s0);
}

// SSPiRAL(4+4,3): S_i -> S_{i+1} at (8-i) lambda for i < 3; from S_3 the 5
// lambda failures split 4:1 between S_4 and data loss; S_4 loses data at
// 4 lambda; S_j repairs to S_{j-1} at j mu.
inline MarkovModel sspiral_443_model(const Rational& lambda, const Rational& mu) {
  detail::require_positive(lambda, "lambda");
  if (mu < 0) throw ValidationError("mu", "must be nonnegative");
  std::vector<std::tuple<std::string, std::string, Rational>> r;
  for (int i = 0; i < 3; ++i) {
    r.emplace_back("S" + std::to_string(i), "S" + std::to_string(i + 1), lambda * (8 - i));
  }
  r.emplace_back("S3", "S4", lambda * 4);
  r.emplace_back("S3", "SDL", lambda);
  r.emplace_back("S4", "SDL", lambda * 4);
  for (int j = 1; j <= 4; ++j) {
    r.emplace_back("S" + std::to_string(j), "S" + std::to_string(j - 1), mu * j);
  }
  return MarkovModel::from_labels({"S0", "S1", "S2", "S3", "S4", "SDL"}, r, {"SDL"}, "S0");
}

// Duplexed disks behind one controller.
inline MarkovModel controller_c1_model(const ControllerRates& c) {
  return MarkovModel::from_labels({"S0", "S1", "S2"},
                                  {{"S0", "S1", c.lambda_d * 2},
                                   {"S1", "S0", c.mu_d},
                                   {"S1", "S2", c.lambda_c + c.lambda_d},
                                   {"S0", "S2", c.lambda_c}},
                                  {"S2"}, "S0");
}

// One controller per disk: each disk/controller string is down when either
// part fails; data is lost when both strings are down.
inline MarkovModel controller_c2_model(const ControllerRates& c) {
  const Rational string_rate = c.lambda_d + c.lambda_c;
  return MarkovModel::from_labels({"S0", "S1d", "S1c", "S2"},
                                  {{"S0", "S1d", c.lambda_d * 2},
                                   {"S0", "S1c", c.lambda_c * 2},
                                   {"S1d", "S0", c.mu_d},
                                   {"S1c", "S0", c.mu_c},
                                   {"S1d", "S2", string_rate},
                                   {"S1c", "S2", string_rate}},
                                  {"S2"}, "S0");
}

// Two controllers cross-connected to both disks: data stays accessible while
// at least one disk and one controller work. State Sab has a failed disks
// and b failed controllers.
inline MarkovModel controller_c3_model(const ControllerRates& c) {
  std::vector<std::tuple<std::string, std::string, Rational>> r;
  auto name = [](int a, int b) { return "S" + std::to_string(a) + std::to_string(b); };
  for (int a = 0; a <= 1; ++a) {
    for (int b = 0; b <= 1; ++b) {
      r.emplace_back(name(a, b), a == 1 ? "S2" : name(a + 1, b), c.lambda_d * (2 - a));
      r.emplace_back(name(a, b), b == 1 ? "S2" : name(a, b + 1), c.lambda_c * (2 - b));
      if (a == 1) r.emplace_back(name(a, b), name(0, b), c.mu_d);
      if (b == 1) r.emplace_back(name(a, b), name(a, 0), c.mu_c);
    }
  }
  return MarkovModel::from_labels({"S00", "S10", "S01", "S11", "S2"}, r, {"S2"}, "S00");
}

// Birth-death chain of a survivor profile without repair: from state i the
// (N-i) delta failures lead to state i+1 with the conditional survival
// probability v_{i+1}/v_i and to data loss otherwise.
inline MarkovModel pure_death_model(const SurvivorProfile& p, const Rational& delta) {
  detail::require_positive(delta, "delta");
  std::vector<std::string> states;
  for (int i = 0; i <= p.max_tolerated(); ++i) states.push_back("S" + std::to_string(i));
  states.push_back("SDL");
  std::vector<std::tuple<std::string, std::string, Rational>> r;
  for (int i = 0; i <= p.max_tolerated(); ++i) {
    const Rational out = delta * (p.disks() - i);
    const Rational q = i < p.max_tolerated() ? p.visit_probability(i + 1) / p.visit_probability(i) : Rational(0);
    if (q > 0) r.emplace_back(states[static_cast<std::size_t>(i)], states[static_cast<std::size_t>(i + 1)], out * q);
    if (q < 1) r.emplace_back(states[static_cast<std::size_t>(i)], "SDL", out * (1 - q));
  }
  return MarkovModel::from_labels(states, r, {"SDL"}, "S0");
}

enum class RepairPolicy { single, parallel };

// Pure-death chain plus repair from every degraded state: mu with a single
// repairman, i mu when each failed disk is rebuilt independently.
inline MarkovModel profile_repair_model(const SurvivorProfile& p, const Rational& delta, const Rational& mu,
                                        RepairPolicy policy = RepairPolicy::single) {
  if (mu < 0) throw ValidationError("mu", "must be nonnegative");
  const MarkovModel base = pure_death_model(p, delta);
  std::vector<Transition> ts = base.transitions();
  for (int i = 1; i <= p.max_tolerated(); ++i) {
    const Rational rate = policy == RepairPolicy::single ? mu : mu * i;
    if (rate > 0) ts.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(i - 1), rate});
  }
  return MarkovModel(base.states(), std::move(ts), base.absorbing(), base.initial());
}

// ---------------------------------------------------------------------------

inline nlohmann::json to_json(const MarkovModel& m) {
  nlohmann::json j;
  j["states"] = m.states();
  j["initial"] = m.states()[m.initial()];
  auto& abs = j["absorbing"] = nlohmann::json::array();
  for (std::size_t a : m.absorbing()) abs.push_back(m.states()[a]);
  auto& ts = j["transitions"] = nlohmann::json::array();
  for (const auto& t : m.transitions()) {
    ts.push_back({{"from", m.states()[t.from]}, {"to", m.states()[t.to]}, {"rate", to_string(t.rate)}});
  }
  return j;
}

inline MarkovModel markov_from_json(const nlohmann::json& j) {
  try {
    std::vector<std::tuple<std::string, std::string, Rational>> rates;
    const auto& ts = j.at("transitions");
    for (std::size_t i = 0; i < ts.size(); ++i) {
      const auto& t = ts[i];
      const std::string path = "transitions[" + std::to_string(i) + "].rate";
      const auto& rate = t.at("rate");
      const Rational r = rate.is_string() ? parse_rational(rate.get<std::string>(), path)
                                          : parse_rational(rate.dump(), path);
      rates.emplace_back(t.at("from").get<std::string>(), t.at("to").get<std::string>(), r);
    }
    return MarkovModel::from_labels(j.at("states").get<std::vector<std::string>>(), rates,
                                    j.value("absorbing", std::vector<std::string>{}),
                                    j.at("initial").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("model", e.what());
  }
}

}  // namespace mirrorlab
