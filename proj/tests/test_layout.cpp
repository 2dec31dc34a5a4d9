#include <gtest/gtest.h>

#include <map>
#include <random>
#include <set>

#include "mirrorlab/mirrorlab.hpp"

using namespace mirrorlab;

namespace {

std::vector<LayoutSpec> sample_specs() {
  std::vector<LayoutSpec> out;
  const char* names[] = {"bm", "nway", "grd", "id", "cd", "lsi", "sspiral", "weaver", "weaver-pds",
                         "bcode", "raid5", "raid6", "raid7", "raid8"};
  for (const char* name : names) {
    for (int n : {4, 6, 8, 9, 10, 12}) {
      try {
        const auto spec = parse_layout_spec(name, n);
        build_layout(spec);
        out.push_back(spec);
      } catch (const ConstraintError&) {
      } catch (const UnsupportedLayout&) {
      }
    }
  }
  return out;
}

std::vector<std::uint64_t> encode(const Layout& l, std::mt19937_64& rng) {
  std::vector<std::uint64_t> v(l.symbols().size(), 0);
  for (std::size_t id : l.data_symbols()) v[id] = rng();
  for (const auto& eq : l.equations()) {
    std::uint64_t x = 0;
    for (std::size_t d : eq.data) x ^= v[d];
    v[eq.parity] = x;
  }
  return v;
}

}  // namespace

TEST(LayoutBuild, EveryKindBuildsSomewhere) {
  std::set<LayoutKind> kinds;
  for (const auto& s : sample_specs()) kinds.insert(s.kind);
  EXPECT_GE(kinds.size(), 11u);
}

TEST(LayoutBuild, SymbolBookkeeping) {
  for (const auto& spec : sample_specs()) {
    const Layout l = build_layout(spec);
    std::size_t placed = 0;
    for (int d = 0; d < l.disks(); ++d) placed += l.symbols_on(d).size();
    EXPECT_EQ(placed, l.symbols().size()) << display_name(spec);
    for (std::size_t id : l.data_symbols()) EXPECT_EQ(l.vector(id).count(), 1u);
  }
}

TEST(LayoutSurvives, MirrorPairs) {
  const Layout bm = build_layout(parse_layout_spec("bm", 8));
  EXPECT_TRUE(survives(bm, {}));
  EXPECT_TRUE(survives(bm, {0}));
  EXPECT_TRUE(survives(bm, {0, 2, 4, 6}));
  EXPECT_FALSE(survives(bm, {0, 1}));
  EXPECT_FALSE(survives(bm, {6, 7}));
}

TEST(LayoutSurvives, ChainedNeighbours) {
  const Layout cd = build_layout(parse_layout_spec("cd", 8));
  for (int d = 0; d < 8; ++d) {
    EXPECT_FALSE(survives(cd, {d, (d + 1) % 8}));
    EXPECT_TRUE(survives(cd, {d, (d + 2) % 8}));
  }
}

TEST(LayoutSurvives, MdsToleratesExactlyK) {
  for (int k = 1; k <= 4; ++k) {
    const Layout l = build_layout(parse_layout_spec("raid" + std::to_string(4 + k), 8));
    for (int i = 0; i <= 8; ++i) {
      EXPECT_EQ(count_survivable(l, i), i <= k ? binomial(8, i) : 0u) << "k=" << k << " i=" << i;
    }
  }
}

TEST(LayoutSurvives, MonotoneUnderSupersets) {
  for (const auto& spec : sample_specs()) {
    const Layout l = build_layout(spec);
    if (l.disks() > 10) continue;
    const std::uint64_t all = (std::uint64_t{1} << l.disks()) - 1;
    for (std::uint64_t m = 0; m <= all; ++m) {
      if (survives(l, FailureSet::from_mask(m))) continue;
      for (int d = 0; d < l.disks(); ++d) {
        EXPECT_FALSE(survives(l, FailureSet::from_mask(m | (std::uint64_t{1} << d)))) << display_name(spec);
      }
    }
  }
}

TEST(LayoutRecovery, RandomPlansReplayByXor) {
  std::mt19937_64 rng(7);
  for (const auto& spec : sample_specs()) {
    const Layout l = build_layout(spec);
    const auto v = encode(l, rng);
    for (int round = 0; round < 40; ++round) {
      FailureSet f;
      const int size = static_cast<int>(rng() % static_cast<std::uint64_t>(l.disks() / 2 + 1));
      while (f.size() < size) f.insert(static_cast<int>(rng() % static_cast<std::uint64_t>(l.disks())));
      const auto plan = recovery_plan(l, f);
      if (!survives(l, f)) {
        ASSERT_TRUE(std::holds_alternative<Unrecoverable>(plan));
        EXPECT_FALSE(std::get<Unrecoverable>(plan).lost_data.empty());
        continue;
      }
      ASSERT_TRUE(std::holds_alternative<RecoveryPlan>(plan)) << display_name(spec);
      std::vector<std::optional<std::uint64_t>> have(v.size());
      for (std::size_t s = 0; s < v.size(); ++s) {
        if (!f.contains(l.symbols()[s].disk)) have[s] = v[s];
      }
      for (const auto& step : std::get<RecoveryPlan>(plan).steps) {
        std::uint64_t x = 0;
        for (std::size_t src : step.sources) {
          ASSERT_TRUE(have[src].has_value()) << "source used before it is available";
          x ^= *have[src];
        }
        have[step.target] = x;
      }
      for (std::size_t s = 0; s < v.size(); ++s) {
        ASSERT_TRUE(have[s].has_value()) << display_name(spec) << " symbol " << l.symbols()[s].label;
        EXPECT_EQ(*have[s], v[s]);
      }
    }
  }
}

TEST(LayoutRecovery, MirrorCopiesDirectly) {
  const Layout bm = build_layout(parse_layout_spec("bm", 4));
  const auto plan = std::get<RecoveryPlan>(recovery_plan(bm, {0}));
  ASSERT_FALSE(plan.steps.empty());
  for (const auto& step : plan.steps) EXPECT_EQ(step.sources.size(), 1u);
}

TEST(LayoutJson, RoundTrip) {
  for (const auto& spec : sample_specs()) {
    const Layout l = build_layout(spec);
    const Layout back = layout_from_json(nlohmann::json::parse(to_json(l).dump()));
    EXPECT_EQ(back.spec(), l.spec());
    ASSERT_EQ(back.symbols().size(), l.symbols().size());
    for (std::size_t s = 0; s < l.symbols().size(); ++s) {
      EXPECT_EQ(back.symbols()[s].label, l.symbols()[s].label);
      EXPECT_EQ(back.symbols()[s].disk, l.symbols()[s].disk);
      EXPECT_EQ(back.vector(s), l.vector(s));
    }
  }
}

TEST(LayoutJson, RejectsBrokenDocuments) {
  auto j = to_json(build_layout(parse_layout_spec("bm", 4)));
  auto bad_disk = j;
  bad_disk["symbols"][0]["disk"] = 9;
  EXPECT_THROW(layout_from_json(bad_disk), Error);
  auto no_symbols = j;
  no_symbols.erase("symbols");
  EXPECT_THROW(layout_from_json(no_symbols), Error);
}

TEST(LayoutErrors, NamesAndSizes) {
  EXPECT_THROW(parse_layout_spec("raid9000", 8), ValidationError);
  EXPECT_THROW(build_layout(parse_layout_spec("bm", 7)), ConstraintError);
  EXPECT_THROW(build_layout(parse_layout_spec("raid5", 0)), ConstraintError);
  const Layout bm = build_layout(parse_layout_spec("bm", 4));
  EXPECT_THROW(survives(bm, {5}), ConstraintError);
  EXPECT_THROW(FailureSet({64}), ConstraintError);
}

TEST(LayoutErrors, CustomEquationsValidated) {
  std::vector<Symbol> syms{{0, SymbolRole::data, "a"}, {1, SymbolRole::parity, "p"}};
  EXPECT_NO_THROW(Layout(LayoutSpec{LayoutKind::custom, 2, 0}, syms, {{1, {0}}}));
  EXPECT_THROW(Layout(LayoutSpec{LayoutKind::custom, 2, 0}, syms, {}), ConstraintError);
  EXPECT_THROW(Layout(LayoutSpec{LayoutKind::custom, 2, 0}, syms, {{0, {0}}}), ConstraintError);
  syms[1].label = "a";
  EXPECT_THROW(Layout(LayoutSpec{LayoutKind::custom, 2, 0}, syms, {{1, {0}}}), ConstraintError);
}

TEST(Gf2, BasisRankAndExpress) {
  gf2::Basis b(4, 3);
  auto v = [](std::initializer_list<int> bits) {
    gf2::BitVector x(4);
    for (int i : bits) x.set(static_cast<std::size_t>(i));
    return x;
  };
  EXPECT_TRUE(b.insert(v({0, 1}), 0));
  EXPECT_TRUE(b.insert(v({1, 2}), 1));
  EXPECT_FALSE(b.insert(v({0, 2}), 2));
  EXPECT_EQ(b.rank(), 2u);
  const auto combo = b.express(v({0, 2}));
  ASSERT_TRUE(combo.has_value());
  EXPECT_EQ(combo->indices(), (std::vector<std::size_t>{0, 1}));
  EXPECT_FALSE(b.contains(v({3})));
}

TEST(Routing, FractionsSumToOneAndSkipFailedDisks) {
  for (const char* name : {"bm", "cd", "id", "grd"}) {
    for (int n : {4, 6, 8}) {
      const Layout l = build_layout(parse_layout_spec(name, n));
      for (std::uint64_t m = 0; m < (std::uint64_t{1} << n); ++m) {
        const auto f = FailureSet::from_mask(m);
        if (!survives(l, f)) {
          EXPECT_THROW(degraded_read_fractions(l, f), ConstraintError);
          continue;
        }
        const auto r = degraded_read_fractions(l, f);
        Rational total_demand = 0;
        Rational total_load = 0;
        for (std::size_t a = 0; a < r.fraction.size(); ++a) {
          Rational s = 0;
          for (std::size_t d = 0; d < r.fraction[a].size(); ++d) {
            if (f.contains(static_cast<int>(d))) {
              EXPECT_EQ(r.fraction[a][d], 0);
            }
            s += r.fraction[a][d];
          }
          EXPECT_EQ(s, 1) << name << " n=" << n << " mask=" << m;
          total_demand += r.demand[a];
        }
        for (const auto& x : r.load) total_load += x;
        EXPECT_EQ(total_load, total_demand);
      }
    }
  }
}

TEST(Routing, ChainedLoadsAreEvenWithinAChain) {
  const Layout l = build_layout(parse_layout_spec("cd", 8));
  const auto r = degraded_read_fractions(l, {0});
  for (int d = 1; d < 8; ++d) EXPECT_EQ(r.load[static_cast<std::size_t>(d)], Rational(8, 7));
  const auto r2 = degraded_read_fractions(l, {0, 3});
  EXPECT_EQ(r2.load[1], Rational(3, 2));
  EXPECT_EQ(r2.load[5], Rational(5, 4));
}

TEST(Routing, InterleavedClusterShare) {
  const Layout l = build_layout(parse_layout_spec("id", 8));
  const auto r = degraded_read_fractions(l, {0});
  for (int d = 1; d < 4; ++d) EXPECT_EQ(r.load[static_cast<std::size_t>(d)], Rational(4, 3));
  for (int d = 4; d < 8; ++d) EXPECT_EQ(r.load[static_cast<std::size_t>(d)], 1);
}

TEST(Routing, MirrorSurvivorDoubles) {
  const Layout l = build_layout(parse_layout_spec("bm", 4));
  const auto r = degraded_read_fractions(l, {1});
  EXPECT_EQ(r.load[0], 2);
  EXPECT_EQ(r.load[1], 0);
  EXPECT_EQ(r.group[1], -1);
  EXPECT_THROW(degraded_read_fractions(build_layout(parse_layout_spec("raid5", 4)), {}), UnsupportedLayout);
}
