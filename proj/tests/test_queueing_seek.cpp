#include <gtest/gtest.h>

#include <cmath>

#include "mirrorlab/mirrorlab.hpp"

using namespace mirrorlab;

namespace {

// Midpoint rule on [0, 1].
template <typename F>
double integrate(F f, int steps = 200000) {
  double s = 0;
  const double h = 1.0 / steps;
  for (int i = 0; i < steps; ++i) s += f((i + 0.5) * h);
  return s * h;
}

WorkloadMix mix(double rate_per_s, double read_fraction, double xr, double xw) {
  WorkloadMix m;
  m.arrival_rate = rate_per_s;
  m.pairs = 1;
  m.read_fraction = read_fraction;
  m.read = ServiceMoments::exponential(xr);
  m.write = ServiceMoments::exponential(xw);
  return m;
}

}  // namespace

TEST(PollaczekKhinchine, ReducesToMm1AndMd1) {
  for (double rho : {0.1, 0.5, 0.9}) {
    EXPECT_NEAR(mg1_wait(rho, ServiceMoments::exponential(1)), rho / (1 - rho), 1e-12);
    EXPECT_NEAR(mg1_wait(rho, ServiceMoments::deterministic(1)), rho / (2 * (1 - rho)), 1e-12);
  }
  EXPECT_THROW(mg1_wait(1.0, ServiceMoments::exponential(1)), InstabilityError);
  EXPECT_THROW(mg1_wait(0.5, ServiceMoments{1, 0.5}), ValidationError);
}

TEST(Priority, ReadWaitRatio) {
  // Per pair 1200/s with 2/3 reads at 1 ms: rho_r = 0.4, rho = 0.8.
  const auto r = priority_read_wait(mix(1200, 2.0 / 3, 1, 1));
  EXPECT_NEAR(r.rho, 0.8, 1e-12);
  EXPECT_NEAR(r.rho_r, 0.4, 1e-12);
  EXPECT_NEAR(r.wait_read / r.wait_fcfs, 1.0 / 3, 1e-12);
  EXPECT_NEAR(r.ratio, 1.0 / 3, 1e-12);
}

TEST(Priority, ConservationLaw) {
  // rho_r W_r + rho_w W_w = rho W_fcfs for exponential classes with equal means.
  const WorkloadMix m = mix(900, 0.5, 1, 1);
  const auto r = priority_read_wait(m);
  const auto d = disk_load(m);
  const double w_write = d.lambda_d * d.mix.second / 2 / ((1 - d.rho_r) * (1 - d.rho));
  EXPECT_NEAR(d.rho_r * r.wait_read + d.rho_w * w_write, d.rho * r.wait_fcfs, 1e-12);
}

TEST(Modes, DegradedLoads) {
  const WorkloadMix m = mix(400, 1, 1, 1);
  const auto normal = mode_metrics(m, Mode::normal);
  const auto degraded = mode_metrics(m, Mode::degraded);
  EXPECT_NEAR(normal.rho, 0.2, 1e-12);
  EXPECT_NEAR(degraded.rho, 0.4, 1e-12);
  EXPECT_NEAR(normal.lambda_max, 2000, 1e-9);
  EXPECT_NEAR(degraded.lambda_max, 1000, 1e-9);
  const auto id = mode_metrics(m, Mode::degraded, LayoutKind::id, 4);
  EXPECT_NEAR(id.read_load_factor, 4.0 / 3, 1e-12);
  EXPECT_THROW(mode_metrics(m, Mode::degraded, LayoutKind::cd), UnsupportedLayout);
  EXPECT_NEAR(overall_read_response(1, 4, 5, 1), 2, 1e-12);
  EXPECT_THROW(overall_read_response(5, 4, 1, 1), ConstraintError);
}

TEST(MirroredReads, ClosedForms) {
  const double x = 1;
  EXPECT_NEAR(mirrored_read_response(ReadPolicy::shared, 0.9, x).response, x / 0.19, 1e-12);
  EXPECT_NEAR(mirrored_read_response(ReadPolicy::uniform_degraded, 0.4, x).response, 5 * x, 1e-12);
  EXPECT_NEAR(mirrored_read_response(ReadPolicy::uniform, 0.5, x).response, 2 * x, 1e-12);
  // Shared queue beats round robin beats random splitting.
  for (double rho = 0.05; rho < 0.95; rho += 0.05) {
    const double shared = mirrored_read_response(ReadPolicy::shared, rho, x).response;
    const double rr = mirrored_read_response(ReadPolicy::round_robin, rho, x).response;
    const double uni = mirrored_read_response(ReadPolicy::uniform, rho, x).response;
    EXPECT_LT(shared, rr);
    EXPECT_LT(rr, uni);
  }
  EXPECT_THROW(mirrored_read_response(ReadPolicy::uniform_degraded, 0.5, x), InstabilityError);
}

TEST(MirroredReads, ErlangRootBelowUtilization) {
  for (int i = 1; i <= 99; ++i) {
    const double rho = i / 100.0;
    const double s = erlang2_sigma(rho);
    EXPECT_GT(s, 0);
    EXPECT_LT(s, rho);
    // sigma solves sigma = LST of Erlang-2 interarrivals at mu (1 - sigma).
    const double lst = std::pow(2 * rho / (2 * rho + 1 - s), 2);
    EXPECT_NEAR(s, lst, 1e-12);
  }
  EXPECT_NEAR(erlang2_sigma(0.5), 0.381966, 1e-6);
}

TEST(ForkJoin, WriteResponse) {
  const auto r = forkjoin_write_response(0.8, 1);
  EXPECT_NEAR(r.single, 5, 1e-12);
  EXPECT_NEAR(r.fork_join, 7.0, 1e-12);
  EXPECT_LE(r.fork_join, r.bound);
  EXPECT_GE(r.fork_join, r.single);
}

TEST(Rebuild, VacationModel) {
  const double t_rot = 8.33;
  const auto rb = RebuildParams::track_reads(t_rot, 1000);
  const auto zero = vsm_rebuild(0, ServiceMoments::exponential(10), rb);
  EXPECT_NEAR(zero.rebuild_time, 1000 * t_rot, 1e-9);
  const double lambda = 0.03;
  const auto r = vsm_rebuild(lambda, ServiceMoments::exponential(10), rb);
  EXPECT_NEAR(r.wait_vsm - r.wait_mg1, t_rot / 2, 1e-12);
  EXPECT_NEAR(r.rebuild_time_busy, 1000 * t_rot / 0.7, 1e-9);
  EXPECT_NEAR(r.rebuild_time, 1000 * r.cycle * lambda * t_rot, 1e-9);
  EXPECT_GT(r.rebuild_time, r.rebuild_time_busy);
  EXPECT_TRUE(r.warnings.empty());
  EXPECT_FALSE(vsm_rebuild(0.099, ServiceMoments::exponential(10), RebuildParams::track_reads(12, 10)).warnings.empty());
  EXPECT_THROW(vsm_rebuild(0.1, ServiceMoments::exponential(10), rb), InstabilityError);
}

TEST(Rebuild, ClusteredLoad) {
  EXPECT_EQ(craid_alpha(10, 10), 1);
  EXPECT_EQ(craid_alpha(10, 4), Rational(1, 3));
  EXPECT_THROW(craid_alpha(10, 1), ConstraintError);
}

TEST(Seek, ClosedFormsAgainstIntegrals) {
  for (int k = 1; k <= 5; ++k) {
    // |U - V| has survival (1 - d)^2; min and max of k independent copies.
    const double read = integrate([&](double d) { return std::pow(1 - d, 2 * k); });
    const double write = integrate([&](double d) { return 1 - std::pow(1 - std::pow(1 - d, 2), k); });
    EXPECT_NEAR(to_double(expected_seek(SeekKind::read_kway, {k}).value), read, 1e-9);
    EXPECT_NEAR(to_double(expected_seek(SeekKind::write_kway, {k}).value), write, 1e-9);
  }
  EXPECT_EQ(expected_seek(SeekKind::write_kway, {2}).value, Rational(7, 15));
  EXPECT_EQ(expected_seek(SeekKind::read_kway, {2}).value, Rational(1, 5));
  EXPECT_EQ(expected_seek(SeekKind::read_kway, {1}).value, Rational(1, 3));
  EXPECT_NEAR(to_double(expected_seek(SeekKind::aap_single).value), integrate([](double r) { return std::fabs(r - 0.5); }), 1e-9);
  EXPECT_NEAR(to_double(expected_seek(SeekKind::aap_mirrored).value),
              integrate([](double r) { return std::min(std::fabs(r - 0.25), std::fabs(r - 0.75)); }), 1e-9);
  EXPECT_FALSE(expected_seek(SeekKind::ns_line).exact);
  EXPECT_THROW(expected_seek(SeekKind::read_kway, {0}), ValidationError);
}

TEST(Seek, MonteCarloMatchesClosedForms) {
  for (SeekKind kind : all_seek_kinds()) {
    const auto e = mc_seek(kind, {2}, 200000, 11);
    const double expect = to_double(expected_seek(kind, {2}).value);
    const double tol = kind == SeekKind::ns_line ? 0.02 * expect : 4 * e.stderr_;
    EXPECT_NEAR(e.mean, expect, tol) << seek_kind_name(kind);
  }
  EXPECT_THROW(mc_seek(SeekKind::aap_single, {}, 10, 1), ValidationError);
}

TEST(Seek, MonteCarloIsDeterministic) {
  const auto a = mc_seek(SeekKind::ns_circle, {}, 5000, 3);
  const auto b = mc_seek(SeekKind::ns_circle, {}, 5000, 3);
  const auto c = mc_seek(SeekKind::ns_circle, {}, 5000, 4);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_NE(a.mean, c.mean);
}

TEST(Seek, KindNames) {
  for (SeekKind kind : all_seek_kinds()) EXPECT_EQ(parse_seek_kind(seek_kind_name(kind)), kind);
  EXPECT_THROW(parse_seek_kind("warp"), ValidationError);
}

TEST(ZonedSplit, CapacityMedians) {
  const SeekGeometry g{std::nullopt, true, 0.4, 1.0};
  const auto z = zoned_split(g);
  // Capacity grows with r, so equal halves need equal r^2 differences.
  auto cap = [](double a, double b) { return b * b - a * a; };
  EXPECT_NEAR(cap(g.r_inner, z.split), cap(z.split, g.r_outer), 1e-12);
  EXPECT_NEAR(cap(g.r_inner, z.arm_inner), cap(z.arm_inner, z.split), 1e-12);
  EXPECT_NEAR(cap(z.split, z.arm_outer), cap(z.arm_outer, g.r_outer), 1e-12);
  ASSERT_TRUE(z.split_printed.has_value());
  EXPECT_NEAR(*z.split_printed, g.r_inner + z.split, 1e-12);
  const auto flat = zoned_split({std::nullopt, false, 0.4, 1.0});
  EXPECT_NEAR(flat.split, 0.7, 1e-12);
  EXPECT_NEAR(flat.arm_inner, 0.55, 1e-12);
  EXPECT_FALSE(flat.split_printed.has_value());
  EXPECT_THROW(zoned_split({std::nullopt, true, 1.0, 0.5}), ValidationError);
}

TEST(DiskModel, AccessTime) {
  const DiskModel d;
  EXPECT_EQ(d.seek_time(0), 0);
  EXPECT_EQ(d.seek_time(50), d.settle);
  EXPECT_EQ(d.seek_time(-50), d.settle);
  for (int x = 1; x < d.cylinders; ++x) EXPECT_LE(d.seek_time(x - 1), d.seek_time(x) + 1e-12);
  // Mean seek by brute force over a coarse grid of cylinder pairs.
  RandomStream rng(9, 0);
  RunningStats s;
  for (int i = 0; i < 400000; ++i) {
    const auto a = static_cast<int>(rng.below(static_cast<std::uint64_t>(d.cylinders)));
    const auto b = static_cast<int>(rng.below(static_cast<std::uint64_t>(d.cylinders)));
    s.add(d.seek_time(a - b));
  }
  const double seek = d.mean_access_time() - d.t_rot / 2 - d.transfer_time();
  EXPECT_NEAR(s.mean(), seek, 4 * s.stderr_of_mean());
  DiskModel bad;
  bad.cylinders = 1;
  EXPECT_THROW(bad.validate(), ValidationError);
}
