#pragma once

// Monte Carlo estimate of the time to data loss, driven either by a layout
// (per-disk failure and repair clocks, loss when `survives` fails) or by an
// absorbing Markov model.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "mirrorlab/errors.hpp"
#include "mirrorlab/layout.hpp"
#include "mirrorlab/markov.hpp"
#include "mirrorlab/random.hpp"
#include "mirrorlab/stats.hpp"

namespace mirrorlab {

struct LifetimeDist {
  enum class Kind { exponential, weibull };
  Kind kind = Kind::exponential;
  double rate = 1e-6;  // exponential, per hour
  double shape = 1;    // weibull
  double scale = 1e6;  // weibull, hours

  static LifetimeDist exponential(double rate) { return {Kind::exponential, rate, 1, 1 / rate}; }
  static LifetimeDist weibull(double shape, double scale) { return {Kind::weibull, 0, shape, scale}; }

  double sample(RandomStream& rng) const {
    return kind == Kind::exponential ? rng.exponential(rate) : rng.weibull(shape, scale);
  }

  void validate() const {
    if (kind == Kind::exponential && !(rate > 0)) throw ValidationError("lifetime.rate", "must be positive");
    if (kind == Kind::weibull && !(shape > 0)) throw ValidationError("lifetime.shape", "must be positive");
    if (kind == Kind::weibull && !(scale > 0)) throw ValidationError("lifetime.scale", "must be positive");
  }
};

struct RepairDist {
  enum class Kind { none, exponential, deterministic };
  Kind kind = Kind::none;
  double rate = 0;  // exponential, per hour
  double mttr = 0;  // deterministic, hours

  static RepairDist none() { return {}; }
  static RepairDist exponential(double rate) { return {Kind::exponential, rate, 1 / rate}; }
  static RepairDist deterministic(double mttr) { return {Kind::deterministic, 1 / mttr, mttr}; }

  double sample(RandomStream& rng) const {
    switch (kind) {
      case Kind::none: return std::numeric_limits<double>::infinity();
      case Kind::exponential: return rng.exponential(rate);
      case Kind::deterministic: return mttr;
    }
    return std::numeric_limits<double>::infinity();
  }

  void validate() const {
    if (kind == Kind::exponential && !(rate > 0)) throw ValidationError("repair.rate", "must be positive");
    if (kind == Kind::deterministic && !(mttr > 0)) throw ValidationError("repair.mttr", "must be positive");
  }
};

struct McReliabilityConfig {
  std::optional<Layout> layout;
  std::optional<MarkovModel> model;
  LifetimeDist lifetime;
  RepairDist repair;
  std::optional<int> spares;  // empty: unlimited
  std::uint64_t trials = 10000;
  std::uint64_t seed = 1;
  std::uint64_t max_events_per_trial = 100'000'000;

  void validate() const {
    if (layout.has_value() == model.has_value())
      throw ValidationError("sim.source", "exactly one of layout and model must be given");
    if (trials < 1) throw ValidationError("sim.trials", "must be at least 1");
    if (spares && *spares < 0) throw ValidationError("sim.spares", "must be nonnegative");
    lifetime.validate();
    repair.validate();
    if (layout && layout->disks() > 64) throw ValidationError("layout.disks", "at most 64 disks can be simulated");
  }
};

namespace detail {

class SurvivalCache {
 public:
  explicit SurvivalCache(const Layout& layout) : layout_(layout) {
    if (layout.disks() <= 24) dense_.assign(std::size_t{1} << layout.disks(), -1);
  }

  bool operator()(std::uint64_t mask) {
    if (!dense_.empty()) {
      auto& slot = dense_[mask];
      if (slot < 0) slot = survives(layout_, FailureSet::from_mask(mask)) ? 1 : 0;
      return slot == 1;
    }
    auto it = sparse_.find(mask);
    if (it != sparse_.end()) return it->second;
    const bool ok = survives(layout_, FailureSet::from_mask(mask));
    sparse_.emplace(mask, ok);
    return ok;
  }

 private:
  const Layout& layout_;
  std::vector<std::int8_t> dense_;
  std::unordered_map<std::uint64_t, bool> sparse_;
};

// Index of the `k`-th set (or clear, if `want_set` is false) bit among the low n.
inline int nth_disk(std::uint64_t mask, int n, std::uint64_t k, bool want_set) {
  for (int d = 0; d < n; ++d) {
    if (((mask >> d) & 1u) == static_cast<std::uint64_t>(want_set)) {
      if (k == 0) return d;
      --k;
    }
  }
  throw ConstraintError("disk index out of range");
}

// Exponential lifetimes, exponential or no repair, parallel repair and
// unlimited spares: every state with i failed disks leaves at rate
// (N - i) delta + i mu, so holding times only need visit counts per level and
// the 1 -> 0 -> 1 round trips form a geometric run.
inline double fast_trial(const McReliabilityConfig& cfg, SurvivalCache& alive, bool singles_survive,
                         RandomStream& rng) {
  const int n = cfg.layout->disks();
  const double delta = cfg.lifetime.rate;
  const double mu = cfg.repair.kind == RepairDist::Kind::exponential ? cfg.repair.rate : 0.0;
  std::vector<std::uint64_t> visits(static_cast<std::size_t>(n) + 1, 0);
  std::uint64_t mask = 0;
  std::uint64_t events = 0;
  while (true) {
    if (++events > cfg.max_events_per_trial) throw BudgetExceeded("event budget exhausted in one trial");
    const int level = std::popcount(mask);
    const double fail_rate = (n - level) * delta;
    const double repair_rate = level * mu;
    ++visits[static_cast<std::size_t>(level)];
    if (level == 1 && singles_survive && mu > 0) {
      const double p_escape = fail_rate / (fail_rate + repair_rate);
      const std::uint64_t loops = rng.geometric(p_escape);
      visits[0] += loops;
      visits[1] += loops;
      if (loops > 0) mask = std::uint64_t{1} << rng.below(static_cast<std::uint64_t>(n));
      const int d = nth_disk(mask, n, rng.below(static_cast<std::uint64_t>(n - 1)), false);
      mask |= std::uint64_t{1} << d;
      if (!alive(mask)) break;
      continue;
    }
    if (rng.uniform() * (fail_rate + repair_rate) < repair_rate) {
      mask &= ~(std::uint64_t{1} << nth_disk(mask, n, rng.below(static_cast<std::uint64_t>(level)), true));
    } else {
      mask |= std::uint64_t{1} << nth_disk(mask, n, rng.below(static_cast<std::uint64_t>(n - level)), false);
      if (!alive(mask)) break;
    }
  }
  double t = 0;
  for (int i = 0; i <= n; ++i) {
    const auto v = visits[static_cast<std::size_t>(i)];
    if (v == 0) continue;
    const double rate = (n - i) * delta + i * mu;
    t += rng.gamma(static_cast<double>(v), 1 / rate);
  }
  return t;
}

// Per-disk clocks; replaced disks start a fresh lifetime.
inline double general_trial(const McReliabilityConfig& cfg, SurvivalCache& alive, RandomStream& rng) {
  const int n = cfg.layout->disks();
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> fail_at(static_cast<std::size_t>(n));
  std::vector<double> repair_at(static_cast<std::size_t>(n), inf);
  for (auto& f : fail_at) f = cfg.lifetime.sample(rng);
  std::uint64_t mask = 0;
  std::optional<int> spares = cfg.spares;
  std::uint64_t events = 0;
  while (true) {
    if (++events > cfg.max_events_per_trial) throw BudgetExceeded("event budget exhausted in one trial");
    int who = -1;
    double when = inf;
    for (int d = 0; d < n; ++d) {
      const double t = ((mask >> d) & 1u) ? repair_at[static_cast<std::size_t>(d)] : fail_at[static_cast<std::size_t>(d)];
      if (t < when) {
        when = t;
        who = d;
      }
    }
    if (who < 0) throw ConstraintError("no further events: the array can neither fail nor recover");
    const auto w = static_cast<std::size_t>(who);
    if ((mask >> who) & 1u) {
      mask &= ~(std::uint64_t{1} << who);
      repair_at[w] = inf;
      fail_at[w] = when + cfg.lifetime.sample(rng);
      continue;
    }
    mask |= std::uint64_t{1} << who;
    if (!alive(mask)) return when;
    if (spares && *spares == 0) {
      repair_at[w] = inf;
    } else {
      if (spares) --*spares;
      repair_at[w] = when + cfg.repair.sample(rng);
    }
  }
}

struct JumpTable {
  std::vector<double> out_rate;
  std::vector<std::vector<std::pair<double, std::size_t>>> cumulative;
};

inline JumpTable jump_table(const MarkovModel& m) {
  const std::size_t n = m.states().size();
  JumpTable j;
  j.out_rate.assign(n, 0);
  j.cumulative.resize(n);
  for (const Transition& t : m.transitions()) {
    const double r = to_double(t.rate);
    if (r <= 0) continue;
    j.out_rate[t.from] += r;
    j.cumulative[t.from].emplace_back(j.out_rate[t.from], t.to);
  }
  return j;
}

inline double markov_trial(const McReliabilityConfig& cfg, const JumpTable& jt, RandomStream& rng) {
  const MarkovModel& m = *cfg.model;
  std::vector<std::uint64_t> visits(m.states().size(), 0);
  std::size_t s = m.initial();
  std::uint64_t events = 0;
  while (!m.is_absorbing(s)) {
    if (++events > cfg.max_events_per_trial) throw BudgetExceeded("event budget exhausted in one trial");
    if (jt.out_rate[s] <= 0) throw ConstraintError("state " + m.states()[s] + " is a trap: absorption unreachable");
    ++visits[s];
    const double u = rng.uniform() * jt.out_rate[s];
    const auto& row = jt.cumulative[s];
    std::size_t next = row.back().second;
    for (const auto& [c, to] : row) {
      if (u < c) {
        next = to;
        break;
      }
    }
    s = next;
  }
  double t = 0;
  for (std::size_t i = 0; i < visits.size(); ++i) {
    if (visits[i] > 0) t += rng.gamma(static_cast<double>(visits[i]), 1 / jt.out_rate[i]);
  }
  return t;
}

}  // namespace detail

inline bool uses_fast_path(const McReliabilityConfig& cfg) {
  return cfg.layout && cfg.lifetime.kind == LifetimeDist::Kind::exponential &&
         cfg.repair.kind != RepairDist::Kind::deterministic && !cfg.spares;
}

// Metric "mttdl"; trial i draws from stream i of the seed.
inline SimResult mc_reliability(const McReliabilityConfig& cfg) {
  cfg.validate();
  SimResult res;
  res.seed = cfg.seed;
  RunningStats stats;
  if (cfg.model) {
    const MarkovModel& m = *cfg.model;
    if (m.is_absorbing(m.initial())) throw ConstraintError("initial state is absorbing");
    const auto jt = detail::jump_table(m);
    for (std::uint64_t i = 0; i < cfg.trials; ++i) {
      RandomStream rng(cfg.seed, i);
      stats.add(detail::markov_trial(cfg, jt, rng));
    }
    res.diagnostics.push_back("method=markov-jump");
  } else {
    detail::SurvivalCache alive(*cfg.layout);
    if (!alive(0)) throw ConstraintError("layout loses data with no failures");
    bool singles = true;
    for (int d = 0; d < cfg.layout->disks(); ++d) singles = singles && alive(std::uint64_t{1} << d);
    const bool fast = uses_fast_path(cfg);
    for (std::uint64_t i = 0; i < cfg.trials; ++i) {
      RandomStream rng(cfg.seed, i);
      stats.add(fast ? detail::fast_trial(cfg, alive, singles, rng) : detail::general_trial(cfg, alive, rng));
    }
    res.diagnostics.push_back(fast ? "method=level-aggregated" : "method=per-disk-clocks");
  }
  res.set("mttdl", stats.estimate());
  return res;
}

}  // namespace mirrorlab
