#pragma once

// MTTDL and epsilon tables over the built-in layouts, and reliability curves
// against normalized time t / MTTF.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "mirrorlab/layout.hpp"
#include "mirrorlab/reliability.hpp"
#include "mirrorlab/report.hpp"

namespace mirrorlab {

struct TableLayout {
  std::string name;
  LayoutSpec spec;
  std::optional<int> truncate;  // levels above are counted as data loss
};

inline std::vector<TableLayout> standard_layouts(int n) {
  std::vector<TableLayout> out;
  auto add = [&](const std::string& name, const std::string& kind, std::optional<int> trunc = std::nullopt) {
    out.push_back({name, parse_layout_spec(kind, n), trunc});
  };
  add("raid5", "raid5");
  add("bm", "bm");
  add("cd", "cd");
  add("grd", "grd");
  add("id", "id");
  add("raid6", "raid6");
  add("lsi", "lsi");
  add("lsi_i3", "lsi", 3);
  add("raid7", "raid7");
  add("sspiral", "sspiral");
  add("raid8", "raid8");
  add("weaver", "weaver");
  add("weaver-pds", "weaver-pds");
  return out;
}

// Profile of a table entry, or nothing when the layout does not exist at N.
inline std::optional<SurvivorProfile> table_profile(const TableLayout& t,
                                                    std::uint64_t budget = kDefaultEnumerationBudget) {
  std::optional<SurvivorProfile> p;
  try {
    p = survivor_profile(t.spec, budget);
  } catch (const ConstraintError&) {
    return std::nullopt;
  } catch (const UnsupportedLayout&) {
    return std::nullopt;
  }
  if (t.truncate) p = p->truncated(*t.truncate);
  return p;
}

// Table values as printed, at N = 8.
inline std::optional<Rational> printed_mttdl(const std::string& name, int n) {
  if (n != 8) return std::nullopt;
  static const std::vector<std::pair<std::string, Rational>> printed = {
      {"raid5", Rational(15, 56)},    {"bm", Rational(163, 280)},     {"cd", Rational(379, 840)},
      {"grd", Rational(3, 8)},        {"id", Rational(61, 168)},      {"raid6", Rational(73, 168)},
      {"lsi", Rational(521, 840)},    {"lsi_i3", Rational(521, 840)}, {"raid7", Rational(638, 840)},
      {"sspiral", Rational(701, 840)}, {"raid8", Rational(743, 840)}};
  for (const auto& [k, v] : printed) {
    if (k == name) return v;
  }
  return std::nullopt;
}

// Leading epsilon terms as printed, as functions of N (ID with c = 2).
inline std::optional<EpsilonTerm> printed_epsilon(const std::string& name, int n) {
  const Rational nn(n);
  auto c = [&](int k) { return Rational(BigInt(binomial(n, k))); };
  if (name == "raid5") return EpsilonTerm{2, c(2)};
  if (name == "bm") return EpsilonTerm{2, nn / 2};
  if (name == "cd") return EpsilonTerm{2, nn};
  if (name == "grd") return EpsilonTerm{2, nn * (n - 1) / 4};
  if (name == "id") return EpsilonTerm{2, nn * (n - 2) / 4};
  if (name == "raid6") return EpsilonTerm{3, c(3)};
  if (name == "lsi" || name == "lsi_i3") return EpsilonTerm{3, nn / 2};
  if (name == "raid7") return EpsilonTerm{4, c(4)};
  if (name == "sspiral" && n == 8) return EpsilonTerm{5, Rational(BigInt(binomial(8, 4))) / 5};
  if (name == "raid8") return EpsilonTerm{5, c(5)};
  return std::nullopt;
}

inline std::string over_840(const Rational& v) {
  const Rational x = v * 840;
  if (denominator(x) != 1) return "";
  return numerator(x).str() + "/840";
}

inline Table mttdl_table(int n, std::uint64_t budget = kDefaultEnumerationBudget) {
  Table t;
  t.columns = {"layout", "mttdl_delta", "decimal", "discrepancy", "over_840", "epsilon", "formula", "version"};
  for (const auto& entry : standard_layouts(n)) {
    const auto p = table_profile(entry, budget);
    if (!p) continue;
    const Rational f = mttdl_factor(*p);
    std::string flag;
    if (auto printed = printed_mttdl(entry.name, n); printed && *printed != f) {
      flag = "paper:" + (over_840(*printed).empty() ? to_string(*printed) : over_840(*printed));
    }
    const auto e = epsilon_expansion(*p);
    t.add({entry.name, to_string(f), Cell::sig(to_double(f)), flag, over_840(f),
           e.leading ? to_string(*e.leading) : "", entry.truncate ? "mttdl.no_repair.truncated" : "mttdl.no_repair",
           std::string(kVersion)});
  }
  return t;
}

inline Table epsilon_table(int n, std::uint64_t budget = kDefaultEnumerationBudget) {
  Table t;
  t.columns = {"layout", "coefficient", "exponent", "discrepancy", "next_coefficient", "next_exponent", "formula",
               "version"};
  for (const auto& entry : standard_layouts(n)) {
    const auto p = table_profile(entry, budget);
    if (!p) continue;
    const auto e = epsilon_expansion(*p);
    if (!e.leading) continue;
    std::string flag;
    if (auto printed = printed_epsilon(entry.name, n);
        printed && (printed->exponent != e.leading->exponent || printed->coefficient != e.leading->coefficient)) {
      flag = "paper:" + to_string(*printed);
    }
    t.add({entry.name, to_string(e.leading->coefficient), Cell::integer(e.leading->exponent), flag,
           e.next ? to_string(e.next->coefficient) : "",
           e.next ? Cell::integer(e.next->exponent) : Cell(""), "epsilon.leading", std::string(kVersion)});
  }
  return t;
}

inline const std::vector<std::string>& default_curve_layouts() {
  static const std::vector<std::string> names = {"raid5", "bm", "cd", "grd", "id", "raid6", "lsi", "raid7"};
  return names;
}

inline SurvivorProfile named_profile(const std::string& name, int n) {
  for (const auto& entry : standard_layouts(n)) {
    if (entry.name == name) {
      auto p = table_profile(entry);
      if (!p) throw ConstraintError("layout " + name + " does not exist with N = " + std::to_string(n));
      return *p;
    }
  }
  return survivor_profile(parse_layout_spec(name, n));
}

// Rows of (t, R_layout(t)) with delta = 1.
inline Table reliability_curve(const std::vector<std::string>& layouts, int n, double t_max, double step) {
  if (!(t_max > 0)) throw ValidationError("t_max", "must be positive");
  if (!(step > 0)) throw ValidationError("step", "must be positive");
  if (t_max / step > 1e6) throw ValidationError("step", "more than 10^6 points requested");
  if (layouts.empty()) throw ValidationError("layout", "at least one layout is required");
  std::vector<SurvivorProfile> profiles;
  for (const auto& l : layouts) profiles.push_back(named_profile(l, n));
  Table t;
  t.columns = {"t"};
  t.columns.insert(t.columns.end(), layouts.begin(), layouts.end());
  const auto points = static_cast<long>(std::floor(t_max / step + 1e-9));
  for (long k = 0; k <= points; ++k) {
    const double x = static_cast<double>(k) * step;
    std::vector<Cell> row{Cell::num(x, 6)};
    for (const auto& p : profiles) row.push_back(Cell::num(reliability_at(p, 1.0, x), 10));
    t.add(std::move(row));
  }
  return t;
}

struct Crossover {
  std::string a;
  std::string b;
  double t = 0;
};

inline std::vector<Crossover> curve_crossovers(const std::vector<std::string>& layouts, int n, double t_max) {
  std::vector<Crossover> out;
  std::vector<SurvivorProfile> profiles;
  for (const auto& l : layouts) profiles.push_back(named_profile(l, n));
  for (std::size_t i = 0; i < layouts.size(); ++i) {
    for (std::size_t j = i + 1; j < layouts.size(); ++j) {
      if (auto t = crossover_time(profiles[i], profiles[j], 1.0, t_max)) out.push_back({layouts[i], layouts[j], *t});
    }
  }
  return out;
}

}  // namespace mirrorlab
