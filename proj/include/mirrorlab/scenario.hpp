#pragma once

// INI scenario files: one [scenario] command dispatched to the analytic and
// simulation modules, results returned as a table of records. Rates are per
// second and service times in ms in [workload]; reliability times in hours.

#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "mirrorlab/des.hpp"
#include "mirrorlab/layout.hpp"
#include "mirrorlab/markov.hpp"
#include "mirrorlab/mc_reliability.hpp"
#include "mirrorlab/queueing.hpp"
#include "mirrorlab/reliability.hpp"
#include "mirrorlab/repair_formulas.hpp"
#include "mirrorlab/report.hpp"
#include "mirrorlab/seek.hpp"
#include "mirrorlab/tables.hpp"

namespace mirrorlab {

struct ScenarioOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> trials;
  std::optional<int> disks;
  std::optional<std::string> layout;
};

class Scenario {
 public:
  static Scenario parse(const std::string& text) {
    Scenario s;
    std::istringstream in(text);
    try {
      boost::property_tree::read_ini(in, s.tree_);
    } catch (const boost::property_tree::ini_parser_error& e) {
      throw ValidationError("scenario", "line " + std::to_string(e.line()) + ": " + e.message());
    }
    s.check_keys();
    return s;
  }

  static Scenario load(const std::string& path) {
    boost::property_tree::ptree tree;
    try {
      boost::property_tree::read_ini(path, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
      throw ValidationError("scenario", e.filename() + ":" + std::to_string(e.line()) + ": " + e.message());
    }
    Scenario s;
    s.tree_ = std::move(tree);
    s.check_keys();
    return s;
  }

  std::optional<std::string> text(const std::string& path) const {
    if (auto v = tree_.get_optional<std::string>(path)) {
      std::string t = boost::algorithm::trim_copy(*v);
      if (!t.empty()) return t;
    }
    return std::nullopt;
  }

  std::string text_or(const std::string& path, const std::string& fallback) const {
    return text(path).value_or(fallback);
  }

  std::optional<Rational> rational(const std::string& path) const {
    auto t = text(path);
    if (!t) return std::nullopt;
    try {
      return parse_rational(*t, path);
    } catch (const Error&) {
      throw ValidationError(path, "not a number: '" + *t + "'");
    }
  }

  std::optional<double> real(const std::string& path) const {
    auto r = rational(path);
    if (!r) return std::nullopt;
    return to_double(*r);
  }

  double real_or(const std::string& path, double fallback) const { return real(path).value_or(fallback); }

  std::optional<long long> integer(const std::string& path) const {
    auto r = rational(path);
    if (!r) return std::nullopt;
    if (denominator(*r) != 1) throw ValidationError(path, "must be an integer");
    return numerator(*r).convert_to<long long>();
  }

  std::optional<int> int_value(const std::string& path) const {
    auto v = integer(path);
    if (!v) return std::nullopt;
    if (*v < -1'000'000'000LL || *v > 1'000'000'000LL) throw ValidationError(path, "out of range");
    return static_cast<int>(*v);
  }

  std::optional<std::uint64_t> count(const std::string& path) const {
    auto v = integer(path);
    if (!v) return std::nullopt;
    if (*v < 0) throw ValidationError(path, "must be nonnegative");
    return static_cast<std::uint64_t>(*v);
  }

  bool flag(const std::string& path, bool fallback) const {
    auto t = text(path);
    if (!t) return fallback;
    const std::string v = boost::algorithm::to_lower_copy(*t);
    if (v == "true" || v == "on" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "off" || v == "no" || v == "0") return false;
    throw ValidationError(path, "expected true or false");
  }

 private:
  void check_keys() const {
    static const std::map<std::string, std::set<std::string>> known = {
        {"scenario", {"command", "format", "seed", "name"}},
        {"layout", {"name", "disks", "param", "file"}},
        {"repair",
         {"mttf", "mttr", "dist", "lifetime", "shape", "scale", "spares", "formula", "template", "k", "p_uf", "m",
          "nodes", "capacity", "bandwidth", "replication", "lambda_d", "mu_d", "lambda_c", "mu_c"}},
        {"workload",
         {"arrival_rate", "pairs", "read_fraction", "read_mean", "write_mean", "read_service", "write_service",
          "read_cv2", "write_cv2", "mode", "cluster_size"}},
        {"sim",
         {"trials", "samples", "arrivals", "warmup", "batches", "routing", "disks", "priority", "rebuild", "tracks",
          "track_time", "replications", "kind", "k", "table", "t_max", "step", "layouts", "max_in_system"}},
        {"tolerance", {"sigma", "relative"}},
    };
    for (const auto& [section, body] : tree_) {
      auto it = known.find(section);
      if (it == known.end()) throw ValidationError(section, "unknown section");
      for (const auto& [key, value] : body) {
        if (it->second.count(key) == 0) throw ValidationError(section + "." + key, "unknown key");
      }
    }
  }

  boost::property_tree::ptree tree_;
};

namespace detail {

struct Records {
  Table table;
  std::string command;
  std::uint64_t seed = 0;
  double sigma = 3;
  double relative = 1e-9;

  Records(std::string cmd, std::uint64_t s) : command(std::move(cmd)), seed(s) {
    table.columns = {"command", "metric", "value",   "decimal", "half_width", "samples",
                     "reference", "check", "formula", "seed",    "version"};
  }

  void exact(const std::string& metric, const Rational& v, const std::string& formula) {
    table.add({command, metric, to_string(v), Cell::sig(to_double(v)), "", "", "", "", formula,
               std::to_string(seed), std::string(kVersion)});
  }

  void value(const std::string& metric, double v, const std::string& formula,
             std::optional<double> reference = std::nullopt) {
    std::string check;
    if (reference) check = std::fabs(v - *reference) <= relative * std::fabs(*reference) ? "ok" : "differs";
    table.add({command, metric, Cell::num(v), Cell::sig(v), "", "", reference ? Cell::num(*reference) : Cell(""),
               check, formula, std::to_string(seed), std::string(kVersion)});
  }

  void text(const std::string& metric, const std::string& v, const std::string& formula) {
    table.add({command, metric, v, "", "", "", "", "", formula, std::to_string(seed), std::string(kVersion)});
  }

  void estimate(const std::string& metric, const Estimate& e, const std::string& formula,
                std::optional<double> reference = std::nullopt) {
    std::string check;
    if (reference) {
      const double tol = std::max(sigma * e.stderr_, e.half_width);
      check = std::fabs(e.mean - *reference) <= tol ? "ok" : "outside";
    }
    table.add({command, metric, Cell::num(e.mean), Cell::sig(e.mean), Cell::num(e.half_width),
               Cell::integer(static_cast<long long>(e.samples)), reference ? Cell::num(*reference) : Cell(""), check,
               formula, std::to_string(seed), std::string(kVersion)});
  }
};

inline RepairParams repair_params(const Scenario& s) {
  RepairParams p;
  p.mttf = s.rational("repair.mttf");
  p.mttr = s.rational("repair.mttr");
  p.disks = s.int_value("layout.disks");
  p.k = s.int_value("repair.k");
  p.spares = s.int_value("repair.spares");
  p.p_uf = s.rational("repair.p_uf");
  p.m = s.int_value("repair.m");
  p.nodes = s.int_value("repair.nodes");
  p.capacity = s.rational("repair.capacity");
  p.bandwidth = s.rational("repair.bandwidth");
  p.replication = s.int_value("repair.replication");
  p.lambda_d = s.rational("repair.lambda_d");
  p.mu_d = s.rational("repair.mu_d");
  p.lambda_c = s.rational("repair.lambda_c");
  p.mu_c = s.rational("repair.mu_c");
  return p;
}

inline Layout scenario_layout(const Scenario& s, const ScenarioOverrides& o) {
  if (auto file = s.text("layout.file")) {
    std::ifstream in(*file);
    if (!in) throw ValidationError("layout.file", "cannot open " + *file);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError("layout.file", e.what());
    }
    return layout_from_json(j);
  }
  const std::string name = o.layout.value_or(s.text_or("layout.name", ""));
  if (name.empty()) throw ValidationError("layout.name", "missing");
  const int disks = o.disks.value_or(s.int_value("layout.disks").value_or(8));
  return build_layout(parse_layout_spec(name, disks, s.int_value("layout.param")));
}

inline ServiceSpec service_spec(const Scenario& s, const std::string& prefix, double mean) {
  const std::string kind = s.text_or("workload." + prefix + "_service", "exponential");
  if (kind == "exponential") return ServiceSpec::exponential(mean);
  if (kind == "deterministic") return ServiceSpec::deterministic(mean);
  if (kind == "disk") return ServiceSpec::parametric(DiskModel{});
  throw ValidationError("workload." + prefix + "_service", "expected exponential, deterministic or disk");
}

inline ServiceMoments service_moments(const ServiceSpec& spec, const Scenario& s, const std::string& prefix) {
  if (auto cv2 = s.real("workload." + prefix + "_cv2")) return ServiceMoments::from_cv2(spec.mean_time(), *cv2);
  if (spec.kind == ServiceSpec::Kind::deterministic) return ServiceMoments::deterministic(spec.mean);
  if (spec.kind == ServiceSpec::Kind::exponential) return ServiceMoments::exponential(spec.mean);
  return ServiceMoments::exponential(spec.mean_time());
}

inline WorkloadMix workload(const Scenario& s) {
  WorkloadMix m;
  m.arrival_rate = s.real_or("workload.arrival_rate", 0);
  m.pairs = s.int_value("workload.pairs").value_or(1);
  m.read_fraction = s.real_or("workload.read_fraction", 1);
  const double rmean = s.real_or("workload.read_mean", 10);
  const double wmean = s.real_or("workload.write_mean", rmean);
  m.read = service_moments(service_spec(s, "read", rmean), s, "read");
  m.write = service_moments(service_spec(s, "write", wmean), s, "write");
  m.validate();
  return m;
}

inline DesConfig des_config(const Scenario& s, const ScenarioOverrides& o, std::uint64_t seed) {
  DesConfig c;
  c.arrival_rate = s.real_or("workload.arrival_rate", 0) / 1000.0;
  c.read_fraction = s.real_or("workload.read_fraction", 1);
  const double rmean = s.real_or("workload.read_mean", 10);
  c.read = service_spec(s, "read", rmean);
  c.write = service_spec(s, "write", s.real_or("workload.write_mean", rmean));
  c.disks = s.int_value("sim.disks").value_or(1);
  c.routing = parse_routing(s.text_or("sim.routing", "uniform"));
  c.priority_reads = s.flag("sim.priority", false);
  c.rebuild = parse_rebuild(s.text_or("sim.rebuild", "none"));
  c.track_time = s.real_or("sim.track_time", 8.33);
  c.tracks = s.count("sim.tracks").value_or(0);
  c.arrivals = o.trials.value_or(s.count("sim.arrivals").value_or(c.arrivals));
  c.warmup = s.count("sim.warmup").value_or(std::min<std::uint64_t>(c.warmup, c.arrivals / 10));
  c.batches = s.count("sim.batches").value_or(c.batches);
  c.replications = s.count("sim.replications").value_or(c.replications);
  c.max_in_system = s.count("sim.max_in_system").value_or(c.max_in_system);
  c.seed = seed;
  c.validate();
  return c;
}

inline void run_mttdl(const Scenario& s, const ScenarioOverrides& o, Records& r) {
  const Layout layout = scenario_layout(s, o);
  const SurvivorProfile p = survivor_profile(layout);
  std::string counts;
  for (int i = 0; i <= p.max_tolerated(); ++i) counts += (i ? " " : "") + std::to_string(p.count(i));
  r.text("layout", display_name(layout.spec()) + " N=" + std::to_string(layout.disks()), "layout");
  r.text("A(N,i)", counts, "survivor_profile");
  const Rational f = mttdl_factor(p);
  r.exact("mttdl_delta", f, "mttdl.no_repair");
  if (auto mttf = s.rational("repair.mttf")) r.exact("mttdl_hours", f * *mttf, "mttdl.no_repair");
  const auto e = epsilon_expansion(p);
  if (e.leading) r.text("epsilon_leading", to_string(*e.leading), "epsilon.leading");
  if (e.next) r.text("epsilon_next", to_string(*e.next), "epsilon.next");
  if (auto mttf = s.rational("repair.mttf"); mttf && s.rational("repair.mttr")) {
    const Rational delta = 1 / *mttf;
    const Rational mu = 1 / *s.rational("repair.mttr");
    const auto model = profile_repair_model(p, delta, mu, RepairPolicy::parallel);
    if (model.states().size() <= kExactStateLimit) {
      r.exact("mttdl_repair_hours", solve_mtta_exact(model), "ctmc.profile_parallel");
    } else {
      r.value("mttdl_repair_hours", solve_mtta(model), "ctmc.profile_parallel");
    }
  }
}

inline void run_formula(const Scenario& s, Records& r) {
  const RepairParams p = repair_params(s);
  std::vector<std::string> ids;
  const std::string list = s.text_or("repair.formula", "");
  if (list.empty()) throw ValidationError("repair.formula", "missing");
  boost::algorithm::split(ids, list, boost::is_any_of(","));
  for (auto& id : ids) {
    boost::algorithm::trim(id);
    const auto res = mttdl_closed_form(id, p);
    r.exact(id, res.value, "closed." + id);
    if (res.corrected) r.exact(id + ".corrected", *res.corrected, "closed." + id + ".corrected");
    if (res.approximation) r.exact(id + ".approximation", *res.approximation, "closed." + id + ".approximation");
  }
}

inline void run_markov(const Scenario& s, Records& r) {
  const std::string name = s.text_or("repair.template", "");
  if (name.empty()) throw ValidationError("repair.template", "missing");
  const auto model = build_model(name, repair_params(s));
  r.text("states", std::to_string(model.states().size()), "ctmc." + name);
  if (model.states().size() <= kExactStateLimit) {
    r.exact("mtta", solve_mtta_exact(model), "ctmc." + name);
  } else {
    r.value("mtta", solve_mtta(model), "ctmc." + name);
  }
}

inline void run_mc(const Scenario& s, const ScenarioOverrides& o, Records& r) {
  McReliabilityConfig c;
  c.seed = r.seed;
  c.trials = o.trials.value_or(s.count("sim.trials").value_or(10000));
  std::optional<double> reference;
  std::string ref_formula;
  const auto mttf = s.rational("repair.mttf");
  const auto mttr = s.rational("repair.mttr");
  const std::string dist = s.text_or("repair.dist", mttr ? "exponential" : "none");
  if (auto name = s.text("repair.template")) {
    c.model = build_model(*name, repair_params(s));
    reference = solve_mtta(*c.model);
    ref_formula = "ctmc." + *name;
  } else {
    c.layout = scenario_layout(s, o);
    if (!mttf) throw ValidationError("repair.mttf", "missing");
    const std::string life = s.text_or("repair.lifetime", "exponential");
    if (life == "exponential") {
      c.lifetime = LifetimeDist::exponential(1 / to_double(*mttf));
    } else if (life == "weibull") {
      const double shape = s.real_or("repair.shape", 1);
      const double scale = s.real("repair.scale").value_or(to_double(*mttf) / std::tgamma(1 + 1 / shape));
      c.lifetime = LifetimeDist::weibull(shape, scale);
    } else {
      throw ValidationError("repair.lifetime", "expected exponential or weibull");
    }
    if (dist == "none") {
      c.repair = RepairDist::none();
    } else {
      if (!mttr) throw ValidationError("repair.mttr", "missing");
      if (dist == "exponential") {
        c.repair = RepairDist::exponential(1 / to_double(*mttr));
      } else if (dist == "deterministic") {
        c.repair = RepairDist::deterministic(to_double(*mttr));
      } else {
        throw ValidationError("repair.dist", "expected none, exponential or deterministic");
      }
    }
    c.spares = s.int_value("repair.spares");
    const SurvivorProfile p = survivor_profile(*c.layout);
    if (life == "exponential" && !c.spares) {
      if (c.repair.kind == RepairDist::Kind::none) {
        reference = to_double(mttdl_factor(p) * *mttf);
        ref_formula = "mttdl.no_repair";
      } else if (c.repair.kind == RepairDist::Kind::exponential) {
        reference = solve_mtta(profile_repair_model(p, 1 / *mttf, 1 / *mttr, RepairPolicy::parallel));
        ref_formula = "ctmc.profile_parallel";
      }
    }
  }
  const SimResult res = mc_reliability(c);
  r.estimate("mttdl_hours", res.at("mttdl"), "mc.reliability", reference);
  if (reference) r.value("reference_hours", *reference, ref_formula);
  for (const auto& d : res.diagnostics) r.text("diagnostic", d, "mc.reliability");
}

inline void run_queue(const Scenario& s, Records& r) {
  const WorkloadMix m = workload(s);
  const DiskLoad d = disk_load(m);
  r.value("rho", d.rho, "queue.disk_load");
  r.value("rho_read", d.rho_r, "queue.disk_load");
  const ModeMetrics normal = mode_metrics(m, Mode::normal);
  r.value("lambda_max_normal", normal.lambda_max, "queue.mode_metrics");
  const auto layout = s.text_or("layout.name", "bm") == "id" ? LayoutKind::id : LayoutKind::bm;
  const ModeMetrics degraded = mode_metrics(m, Mode::degraded, layout, s.int_value("workload.cluster_size").value_or(2));
  r.value("lambda_max_degraded", degraded.lambda_max, "queue.mode_metrics");
  r.value("rho_degraded", degraded.rho, "queue.mode_metrics");
  try {
    const PriorityResult pr = priority_read_wait(m);
    r.value("wait_fcfs_ms", pr.wait_fcfs, "queue.mg1");
    r.value("wait_read_priority_ms", pr.wait_read, "queue.priority_read");
    r.value("priority_ratio", pr.ratio, "queue.priority_ratio");
  } catch (const InstabilityError& e) {
    r.text("priority", std::string("unstable: ") + e.what(), "queue.priority_read");
  }
  const double lambda = m.pair_rate() * m.read_fraction / 2;
  for (ReadPolicy policy : {ReadPolicy::uniform, ReadPolicy::uniform_degraded, ReadPolicy::round_robin,
                            ReadPolicy::shared, ReadPolicy::duplicate_min}) {
    const std::string name(policy_name(policy));
    try {
      const auto rr = mirrored_read_response(policy, lambda, m.read.mean);
      r.value("read_response_" + name + "_ms", rr.response, "queue.read." + name);
    } catch (const InstabilityError&) {
      r.text("read_response_" + name + "_ms", "unstable", "queue.read." + name);
    }
  }
  if (auto tracks = s.count("sim.tracks")) {
    const double t_rot = s.real_or("sim.track_time", 8.33);
    const auto v = vsm_rebuild(d.lambda_d, d.mix, RebuildParams::track_reads(t_rot, static_cast<double>(*tracks)));
    r.value("wait_vsm_ms", v.wait_vsm, "queue.vsm_wait");
    r.value("rebuild_time_ms", v.rebuild_time, "queue.vsm_rebuild");
    r.value("rebuild_time_busy_ms", v.rebuild_time_busy, "queue.vsm_rebuild_busy");
    for (const auto& w : v.warnings) r.text("warning", w, "queue.vsm_rebuild");
  }
}

// Closed form a DES run should reproduce, where one exists.
inline std::optional<double> des_reference(const DesConfig& c, const std::string& metric) {
  auto moments = [](const ServiceSpec& sp) -> std::optional<ServiceMoments> {
    if (sp.kind == ServiceSpec::Kind::exponential) return ServiceMoments::exponential(sp.mean);
    if (sp.kind == ServiceSpec::Kind::deterministic) return ServiceMoments::deterministic(sp.mean);
    return std::nullopt;
  };
  const auto xr = moments(c.read);
  const auto xw = moments(c.write);
  if (!xr || !xw) return std::nullopt;
  const double lambda = c.arrival_rate;
  if (c.disks == 1) {
    const double lr = lambda * c.read_fraction;
    const double lw = lambda - lr;
    const double rho_r = lr * xr->mean;
    const double rho = rho_r + lw * xw->mean;
    const double w0 = (lr * xr->second + lw * xw->second) / 2;
    double extra = 0;
    if (c.rebuild == RebuildMode::vsm) extra = c.track_time / 2;
    if (c.rebuild == RebuildMode::pcm) return std::nullopt;
    if (metric == "W" && !c.priority_reads) return w0 / (1 - rho) + extra;
    if (metric == "W_read" && c.priority_reads && c.rebuild == RebuildMode::none) return w0 / (1 - rho_r);
    if (metric == "W_write" && c.priority_reads && c.rebuild == RebuildMode::none)
      return w0 / ((1 - rho_r) * (1 - rho));
    if (metric == "L_arrival" || metric == "L_time") {
      if (c.priority_reads) return std::nullopt;
      const double w = w0 / (1 - rho) + extra;
      const double x = c.read_fraction * xr->mean + (1 - c.read_fraction) * xw->mean;
      return lambda * (w + x);
    }
    return std::nullopt;
  }
  if (c.read_fraction == 1 && c.read.kind == ServiceSpec::Kind::exponential && metric == "W") {
    const double rho = lambda / 2 * c.read.mean;
    if (c.routing == Routing::round_robin) {
      const double s = erlang2_sigma(rho);
      return s * c.read.mean / (1 - s);
    }
    if (c.routing == Routing::uniform) return rho * c.read.mean / (1 - rho);
    if (c.routing == Routing::shared) return c.read.mean / (1 - rho * rho) - c.read.mean;
  }
  return std::nullopt;
}

inline void run_des(const Scenario& s, const ScenarioOverrides& o, Records& r) {
  const DesConfig c = des_config(s, o, r.seed);
  const SimResult res = des_queue(c);
  for (const auto& [name, e] : res.metrics) {
    if (e.samples == 0) continue;
    r.estimate(name, e, "des." + name, des_reference(c, name));
  }
}

inline void run_rebuild(const Scenario& s, const ScenarioOverrides& o, Records& r) {
  const DesConfig c = des_config(s, o, r.seed);
  const SimResult res = des_rebuild(c);
  const double rho = c.offered_utilization();
  const double busy = static_cast<double>(c.tracks) * c.track_time / (1 - rho);
  r.estimate("T_rebuild", res.at("T_rebuild"), "des.rebuild",
             c.rebuild == RebuildMode::vsm ? std::optional<double>(busy) : std::nullopt);
  r.estimate("W", res.at("W"), "des.rebuild");
  r.estimate("R", res.at("R"), "des.rebuild");
  if (c.rebuild == RebuildMode::vsm && c.read.kind != ServiceSpec::Kind::disk) {
    const ServiceMoments x = c.read.kind == ServiceSpec::Kind::exponential ? ServiceMoments::exponential(c.read.mean)
                                                                           : ServiceMoments::deterministic(c.read.mean);
    const auto v = vsm_rebuild(c.arrival_rate, x,
                               RebuildParams::track_reads(c.track_time, static_cast<double>(c.tracks)));
    r.value("rebuild_time_formula", v.rebuild_time, "queue.vsm_rebuild");
    r.value("rebuild_time_busy", v.rebuild_time_busy, "queue.vsm_rebuild_busy");
  }
}

inline void run_seek(const Scenario& s, const ScenarioOverrides& o, Records& r) {
  const std::string kind = s.text_or("sim.kind", "all");
  SeekParams p;
  p.k = s.int_value("sim.k").value_or(2);
  const std::uint64_t samples = o.trials.value_or(s.count("sim.samples").value_or(1'000'000));
  std::vector<SeekKind> kinds;
  if (kind == "all") {
    kinds = all_seek_kinds();
  } else {
    kinds.push_back(parse_seek_kind(kind));
  }
  for (SeekKind k : kinds) {
    const auto v = expected_seek(k, p);
    const auto e = mc_seek(k, p, samples, r.seed);
    const std::string name(seek_kind_name(k));
    if (v.exact) {
      r.exact(name + ".analytic", v.value, v.formula_id);
    } else {
      r.value(name + ".reported", to_double(v.value), v.formula_id);
    }
    r.estimate(name + ".mc", e, "mc.seek", to_double(v.value));
  }
}

}  // namespace detail

inline std::uint64_t scenario_seed(const Scenario& s, const ScenarioOverrides& o) {
  return o.seed.value_or(s.count("scenario.seed").value_or(1));
}

inline Format scenario_format(const Scenario& s) { return parse_format(s.text_or("scenario.format", "csv")); }

inline Table run_scenario(const Scenario& s, const ScenarioOverrides& o = {}) {
  const std::string command = s.text_or("scenario.command", "");
  if (command.empty()) throw ValidationError("scenario.command", "missing");
  const std::uint64_t seed = scenario_seed(s, o);
  if (command == "table") {
    const int n = o.disks.value_or(s.int_value("layout.disks").value_or(8));
    const std::string which = s.text_or("sim.table", "mttdl");
    if (which == "mttdl") return mttdl_table(n);
    if (which == "epsilon") return epsilon_table(n);
    throw ValidationError("sim.table", "expected mttdl or epsilon");
  }
  if (command == "curve") {
    std::vector<std::string> layouts;
    if (auto list = s.text("sim.layouts")) {
      boost::algorithm::split(layouts, *list, boost::is_any_of(","));
      for (auto& l : layouts) boost::algorithm::trim(l);
    } else {
      layouts = default_curve_layouts();
    }
    return reliability_curve(layouts, o.disks.value_or(s.int_value("layout.disks").value_or(8)),
                             s.real_or("sim.t_max", 3), s.real_or("sim.step", 0.05));
  }
  detail::Records r(command, seed);
  r.sigma = s.real_or("tolerance.sigma", 3);
  r.relative = s.real_or("tolerance.relative", 1e-9);
  if (command == "mttdl") {
    detail::run_mttdl(s, o, r);
  } else if (command == "formula") {
    detail::run_formula(s, r);
  } else if (command == "markov") {
    detail::run_markov(s, r);
  } else if (command == "mc") {
    detail::run_mc(s, o, r);
  } else if (command == "queue") {
    detail::run_queue(s, r);
  } else if (command == "des") {
    detail::run_des(s, o, r);
  } else if (command == "rebuild") {
    detail::run_rebuild(s, o, r);
  } else if (command == "seek") {
    detail::run_seek(s, o, r);
  } else {
    throw ValidationError("scenario.command", "unknown command '" + command + "'");
  }
  return r.table;
}

}  // namespace mirrorlab
