#include <gtest/gtest.h>

#include "mirrorlab/mirrorlab.hpp"

using namespace mirrorlab;

namespace {

RepairParams hours(int n, Rational mttf = 1'000'000, Rational mttr = 10) {
  RepairParams p;
  p.mttf = mttf;
  p.mttr = mttr;
  p.disks = n;
  return p;
}

// Birth-death passage times: tau_i = (1 + d_i tau_{i-1}) / b_i.
double birth_death_mtta(const std::vector<double>& birth, const std::vector<double>& death) {
  double tau = 0;
  double total = 0;
  for (std::size_t i = 0; i < birth.size(); ++i) {
    tau = (1 + (i == 0 ? 0 : death[i] * tau)) / birth[i];
    total += tau;
  }
  return total;
}

}  // namespace

TEST(Raid5Chain, ExactSolveMatchesClosedForm) {
  for (int n : {3, 5, 8, 12}) {
    for (const auto& [delta, mu] : {std::pair<Rational, Rational>{Rational(1, 1000000), Rational(1, 10)},
                                    {Rational(1, 1000), Rational(1, 24)},
                                    {Rational(2), Rational(0)}}) {
      const Rational exact = solve_mtta_exact(raid5_repair_model(n, delta, mu));
      EXPECT_EQ(exact, (delta * (2 * n - 1) + mu) / (delta * delta * n * (n - 1)));
    }
  }
}

TEST(Raid5Chain, ShortcutIsTheLeadingTerm) {
  const auto p = hours(8);
  const Rational inf = mttdl_closed_form("raid5_inf", p).value;
  EXPECT_EQ(inf, Rational(12500000000LL, 7));
  const Rational exact = solve_mtta_exact(build_model("raid5_repair", p));
  const Rational delta(1, 1000000);
  const Rational mu(1, 10);
  // Relative gap is (2N-1) delta / mu to first order.
  const double gap = to_double((exact - inf) / inf);
  EXPECT_NEAR(gap, to_double(delta * 15 / mu), 1e-12);
}

TEST(Raid5Chain, DholakiaWithoutUncorrectableErrors) {
  auto p = hours(8);
  p.p_uf = 0;
  EXPECT_EQ(mttdl_closed_form("dholakia", p).value, solve_mtta_exact(build_model("raid5_repair", p)));
  EXPECT_EQ(mttdl_closed_form("dholakia", p).value, Rational(12501875000LL, 7));
  p.p_uf = Rational(1, 100);
  EXPECT_LT(mttdl_closed_form("dholakia", p).value, Rational(12501875000LL, 7));
  p.p_uf = 2;
  EXPECT_THROW(mttdl_closed_form("dholakia", p), ValidationError);
}

TEST(Raidk, PrintedAndCorrected) {
  auto p = hours(8);
  p.k = 2;
  const auto r = mttdl_closed_form("raidk", p);
  EXPECT_NEAR(to_double(r.value), 1.2401e12, 1e8);
  ASSERT_TRUE(r.corrected.has_value());
  EXPECT_NEAR(to_double(*r.corrected), 2.9762e13, 1e9);
  // The corrected leading term is the single-repairman chain for mu >> delta.
  const double chain = solve_mtta(build_model("raidk_repair", p));
  EXPECT_NEAR(chain / to_double(*r.corrected), 1.0, 1e-3);
}

TEST(Raidk, AngusIsKFactorialAbove) {
  for (int k : {1, 2, 3}) {
    auto p = hours(8);
    p.k = k;
    const auto angus = mttdl_closed_form("angus", p);
    const auto raidk = mttdl_closed_form("raidk", p);
    EXPECT_EQ(*angus.approximation / *raidk.corrected, Rational(BigInt(factorial(k))));
    EXPECT_NEAR(to_double(angus.value / *raidk.corrected) / to_double(Rational(BigInt(factorial(k)))), 1, 0.02);
    // Parallel repair chain reaches the Angus value.
    const double chain = solve_mtta(build_model("raidk_parallel", p));
    EXPECT_NEAR(chain / to_double(angus.value), 1, 1e-3);
  }
}

TEST(Raidk, LargeChainFloatPath) {
  // 60 transient states takes the double-precision path.
  const int n = 64;
  const int k = 59;
  RepairParams p = hours(n, 1, 1);
  p.k = k;
  const MarkovModel m = build_model("raidk_repair", p);
  ASSERT_GT(m.states().size(), kExactStateLimit);
  std::vector<double> birth;
  std::vector<double> death;
  for (int i = 0; i <= k; ++i) {
    birth.push_back(n - i);
    death.push_back(i == 0 ? 0 : 1.0);
  }
  const double expect = birth_death_mtta(birth, death);
  EXPECT_NEAR(solve_mtta(m) / expect, 1, 1e-9);
}

TEST(Spares, ReducesToNoRepairAndApproximation) {
  auto p = hours(8);
  p.spares = 0;
  const Rational delta(1, 1000000);
  EXPECT_EQ(mttdl_closed_form("spares_k", p).value, mttdl_factor(mds_profile(8, 1)) / delta);
  p.spares = 1;
  const auto r = mttdl_closed_form("spares_k", p);
  ASSERT_TRUE(r.approximation.has_value());
  EXPECT_GT(r.value, *r.approximation);
  p.spares = 7;
  EXPECT_THROW(mttdl_closed_form("spares_k", p), ValidationError);
}

TEST(Raid51, DirectAndHierarchical) {
  RepairParams p;
  p.mttf = 1000;
  p.mttr = 1;
  p.m = 4;
  EXPECT_EQ(mttdl_closed_form("raid51_direct", p).value, Rational(1000000000000LL, 36));
  const auto h = mttdl_closed_form("raid51_hier", p);
  EXPECT_EQ(h.value, Rational(1000000000000LL, 48));
  const Rational unit = Rational(1000000, 12);
  EXPECT_EQ(*h.corrected, unit * unit / 2);
}

TEST(Placement, CopysetFormulas) {
  RepairParams p;
  p.mttf = 100;
  p.nodes = 10;
  p.capacity = 4;
  p.bandwidth = 2;
  const Rational d(1, 100);
  EXPECT_EQ(mttdl_closed_form("zurich_cp", p).value, Rational(2) / (d * d * 4 * 10));
  EXPECT_EQ(mttdl_closed_form("zurich_dp", p).value, Rational(2) / (d * d * 4 * 10 * 2));
  p.replication = 3;
  EXPECT_EQ(mttdl_closed_form("zurich_cp", p).value, Rational(4) / (d * d * d * 16 * 10));
  EXPECT_EQ(mttdl_closed_form("eafdl_cp", p).value, d * d * 4 / 2);
  EXPECT_EQ(mttdl_closed_form("eafdl_dp", p).value, d * d * 4 * 9 * 2 / 2);
  p.replication = 4;
  EXPECT_THROW(mttdl_closed_form("zurich_cp", p), ValidationError);
  EXPECT_THROW(mttdl_closed_form("nope", p), ValidationError);
  EXPECT_THROW(mttdl_closed_form("raid5_inf", RepairParams{}), ValidationError);
}

TEST(Sspiral, ChainWithoutRepairMatchesProfile) {
  const Rational lambda(1, 1000);
  const auto chain = solve_mtta_exact(sspiral_443_model(lambda, 0));
  EXPECT_EQ(chain * lambda, mttdl_factor(survivor_profile(parse_layout_spec("sspiral", 8))));
  EXPECT_EQ(chain * lambda, Rational(701, 840));
  EXPECT_GT(solve_mtta_exact(sspiral_443_model(lambda, Rational(1, 10))), chain * 100);
}

TEST(Controllers, FirstStepAnalysis) {
  const ControllerRates c{Rational(1, 1000), Rational(1, 10), Rational(1, 2000), Rational(1, 5)};
  // C1: T0 = (1 + 2ld T1) / (2ld + lc), T1 = (1 + md T0) / (md + lc + ld).
  {
    const Rational a = c.mu_d + c.lambda_c + c.lambda_d;
    const Rational out0 = c.lambda_d * 2 + c.lambda_c;
    const Rational t0 = (1 + c.lambda_d * 2 / a) / (out0 - c.lambda_d * 2 * c.mu_d / a);
    EXPECT_EQ(solve_mtta_exact(controller_c1_model(c)), t0);
  }
  // C2: strings fail at s = ld + lc.
  {
    const Rational s = c.lambda_d + c.lambda_c;
    const Rational ad = c.mu_d + s;
    const Rational ac = c.mu_c + s;
    const Rational out0 = (c.lambda_d + c.lambda_c) * 2;
    const Rational t0 = (1 + c.lambda_d * 2 / ad + c.lambda_c * 2 / ac) /
                        (out0 - c.lambda_d * 2 * c.mu_d / ad - c.lambda_c * 2 * c.mu_c / ac);
    EXPECT_EQ(solve_mtta_exact(controller_c2_model(c)), t0);
    EXPECT_EQ(t0, Rational(83827000, 3027));
  }
  // C3 tolerates any single disk plus any single controller failure.
  EXPECT_GT(solve_mtta_exact(controller_c3_model(c)), solve_mtta_exact(controller_c2_model(c)));
}

TEST(Markov, AvailabilityOfTwoStateChain) {
  const auto m = MarkovModel::from_labels({"up", "down"}, {{"up", "down", Rational(1, 100)}}, {"down"}, "up");
  EXPECT_EQ(availability_exact(m, Rational(1, 4)), Rational(25, 26));
  EXPECT_THROW(availability_exact(m, 0), ConstraintError);
}

TEST(Markov, Errors) {
  EXPECT_THROW(MarkovModel::from_labels({"a", "a"}, {}, {}, "a"), ConstraintError);
  EXPECT_THROW(MarkovModel::from_labels({"a", "b"}, {{"a", "a", 1}}, {"b"}, "a"), ConstraintError);
  EXPECT_THROW(MarkovModel::from_labels({"a", "b"}, {{"a", "b", -1}}, {"b"}, "a"), ConstraintError);
  EXPECT_THROW(MarkovModel::from_labels({"a", "b"}, {{"b", "a", 1}}, {"b"}, "a"), ConstraintError);
  const auto loop = MarkovModel::from_labels({"a", "b", "c"}, {{"a", "b", 1}, {"b", "a", 1}}, {"c"}, "a");
  EXPECT_THROW(solve_mtta_exact(loop), SingularSystem);
  const auto trap =
      MarkovModel::from_labels({"a", "b", "c", "d"}, {{"a", "b", 1}, {"a", "c", 1}, {"b", "d", 1}, {"d", "b", 1}},
                               {"c"}, "a");
  EXPECT_THROW(solve_mtta(trap), SingularSystem);
  EXPECT_THROW(build_model("nope", RepairParams{}), ValidationError);
}

TEST(Markov, JsonRoundTrip) {
  const MarkovModel m = controller_c3_model({Rational(1, 1000), Rational(1, 10), Rational(1, 2000), Rational(1, 5)});
  const MarkovModel back = markov_from_json(nlohmann::json::parse(to_json(m).dump()));
  EXPECT_EQ(back.states(), m.states());
  EXPECT_EQ(solve_mtta_exact(back), solve_mtta_exact(m));
  nlohmann::json bad = to_json(m);
  bad["transitions"][0]["to"] = "nowhere";
  EXPECT_THROW(markov_from_json(bad), ConstraintError);
  bad.erase("transitions");
  EXPECT_THROW(markov_from_json(bad), ValidationError);
}

TEST(Markov, ProfileRepairModelNoRepairIsPureDeath) {
  for (const auto& entry : standard_layouts(8)) {
    const auto p = *table_profile(entry);
    EXPECT_EQ(solve_mtta_exact(profile_repair_model(p, 1, 0)), mttdl_factor(p)) << entry.name;
    EXPECT_GT(solve_mtta_exact(profile_repair_model(p, 1, 10)), mttdl_factor(p)) << entry.name;
  }
}
