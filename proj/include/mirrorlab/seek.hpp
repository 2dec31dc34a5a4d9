#pragma once

// Seek-distance models on a normalized [0, 1] cylinder span, Monte Carlo
// estimators for each of them, and a parametric disk access-time model.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mirrorlab/errors.hpp"
#include "mirrorlab/random.hpp"
#include "mirrorlab/rational.hpp"
#include "mirrorlab/stats.hpp"

namespace mirrorlab {

enum class SeekKind { read_kway, write_kway, aap_single, aap_mirrored, aap_two_arm, ns_circle, ns_line, two_head };

inline const std::vector<SeekKind>& all_seek_kinds() {
  static const std::vector<SeekKind> kinds = {SeekKind::read_kway,   SeekKind::write_kway, SeekKind::aap_single,
                                              SeekKind::aap_mirrored, SeekKind::aap_two_arm, SeekKind::ns_circle,
                                              SeekKind::ns_line,     SeekKind::two_head};
  return kinds;
}

inline std::string_view seek_kind_name(SeekKind k) {
  switch (k) {
    case SeekKind::read_kway: return "read_kway";
    case SeekKind::write_kway: return "write_kway";
    case SeekKind::aap_single: return "aap_single";
    case SeekKind::aap_mirrored: return "aap_mirrored";
    case SeekKind::aap_two_arm: return "aap_two_arm";
    case SeekKind::ns_circle: return "ns_circle";
    case SeekKind::ns_line: return "ns_line";
    case SeekKind::two_head: return "two_head";
  }
  return "read_kway";
}

inline SeekKind parse_seek_kind(std::string_view name) {
  for (SeekKind k : all_seek_kinds()) {
    if (seek_kind_name(k) == name) return k;
  }
  throw ValidationError("seek.kind", "unknown seek kind '" + std::string(name) + "'");
}

struct SeekParams {
  int k = 2;  // replication degree for the k-way kinds
};

struct SeekValue {
  SeekKind kind{};
  Rational value;
  bool exact = true;
  std::string formula_id;
  std::string note;
};

inline Rational wallis_product(int k) {
  Rational prod = 1;
  for (int j = 1; j <= k; ++j) prod *= Rational(2 * j, 2 * j + 1);
  return prod;
}

inline SeekValue expected_seek(SeekKind kind, const SeekParams& p = {}) {
  SeekValue v;
  v.kind = kind;
  v.formula_id = "seek." + std::string(seek_kind_name(kind));
  switch (kind) {
    case SeekKind::read_kway:
      if (p.k < 1) throw ValidationError("seek.k", "must be at least 1");
      v.value = Rational(1, 2 * p.k + 1);
      break;
    case SeekKind::write_kway:
      if (p.k < 1) throw ValidationError("seek.k", "must be at least 1");
      v.value = 1 - wallis_product(p.k);
      break;
    case SeekKind::aap_single: v.value = Rational(1, 4); break;
    case SeekKind::aap_mirrored: v.value = Rational(1, 8); break;
    case SeekKind::aap_two_arm: v.value = Rational(5, 36); break;
    case SeekKind::ns_circle: v.value = Rational(5, 36); break;
    case SeekKind::ns_line:
      v.value = Rational(1625, 10000);
      v.exact = false;
      v.note = "reported value; optimal policy 0.1598";
      break;
    case SeekKind::two_head: v.value = Rational(1, 6); break;
  }
  return v;
}

// ---------------------------------------------------------------------------
// Zoned split

struct SeekGeometry {
  std::optional<int> cylinders;
  bool zoned = true;
  double r_inner = 0.5;
  double r_outer = 1.0;

  void validate() const {
    if (cylinders && *cylinders < 2) throw ValidationError("geometry.cylinders", "must be at least 2");
    if (!(r_inner > 0)) throw ValidationError("geometry.r_inner", "must be positive");
    if (!(r_outer > r_inner)) throw ValidationError("geometry.r_outer", "must exceed r_inner");
  }
};

struct ZonedSplit {
  double split = 0;
  // Capacity medians of the two halves.
  double arm_inner = 0;
  double arm_outer = 0;
  // Printed radical expressions, with and without the leading R_i term.
  std::optional<double> split_printed;
  std::optional<double> arm_inner_printed;
  std::optional<double> arm_outer_printed;
  std::optional<double> arm_inner_printed_no_prefix;
  std::optional<double> arm_outer_printed_no_prefix;
};

inline ZonedSplit zoned_split(const SeekGeometry& g) {
  g.validate();
  const double ri = g.r_inner;
  const double ro = g.r_outer;
  ZonedSplit z;
  if (!g.zoned) {
    z.split = (ri + ro) / 2;
    z.arm_inner = ri + (ro - ri) / 4;
    z.arm_outer = ri + 3 * (ro - ri) / 4;
    return z;
  }
  const double ri2 = ri * ri;
  const double ro2 = ro * ro;
  z.split = std::sqrt((ro2 + ri2) / 2);
  z.arm_inner = std::sqrt((3 * ri2 + ro2) / 4);
  z.arm_outer = std::sqrt((ri2 + 3 * ro2) / 4);
  z.split_printed = ri + z.split;
  z.arm_inner_printed_no_prefix = std::sqrt((4 * ri2 + ro2) / 3);
  z.arm_outer_printed_no_prefix = std::sqrt(2 * (ri2 + 2 * ro2) / 3);
  z.arm_inner_printed = ri + *z.arm_inner_printed_no_prefix;
  z.arm_outer_printed = ri + *z.arm_outer_printed_no_prefix;
  return z;
}

// ---------------------------------------------------------------------------
// Monte Carlo

namespace detail {

inline double circle_distance(double a, double b) {
  const double d = std::fabs(a - b);
  return std::min(d, 1 - d);
}

// Batch means for the Markovian server models.
class SeekBatches {
 public:
  explicit SeekBatches(std::uint64_t samples, std::uint64_t batches = 100)
      : per_batch_(std::max<std::uint64_t>(1, samples / batches)) {}

  void add(double x) {
    current_ += x;
    if (++in_batch_ == per_batch_) {
      means_.push_back(current_ / static_cast<double>(per_batch_));
      current_ = 0;
      in_batch_ = 0;
    }
  }

  Estimate estimate() const {
    RunningStats s;
    for (double m : means_) s.add(m);
    Estimate e = s.estimate();
    e.samples = means_.size() * per_batch_;
    return e;
  }

 private:
  std::uint64_t per_batch_;
  std::uint64_t in_batch_ = 0;
  double current_ = 0;
  std::vector<double> means_;
};

}  // namespace detail

inline constexpr std::uint64_t kSeekBurnIn = 1000;

inline Estimate mc_seek(SeekKind kind, const SeekParams& p, std::uint64_t samples, std::uint64_t seed) {
  if (samples < 1000) throw ValidationError("seek.samples", "must be at least 1000");
  if ((kind == SeekKind::read_kway || kind == SeekKind::write_kway) && p.k < 1)
    throw ValidationError("seek.k", "must be at least 1");
  RandomStream rng(seed, static_cast<std::uint64_t>(kind));

  switch (kind) {
    case SeekKind::read_kway:
    case SeekKind::write_kway: {
      RunningStats s;
      for (std::uint64_t i = 0; i < samples; ++i) {
        // Arm distances are independent, as in the analytic model.
        double best = kind == SeekKind::read_kway ? 1.0 : 0.0;
        for (int j = 0; j < p.k; ++j) {
          const double d = std::fabs(rng.uniform() - rng.uniform());
          best = kind == SeekKind::read_kway ? std::min(best, d) : std::max(best, d);
        }
        s.add(best);
      }
      return s.estimate();
    }
    case SeekKind::aap_single:
    case SeekKind::aap_mirrored: {
      RunningStats s;
      for (std::uint64_t i = 0; i < samples; ++i) {
        const double r = rng.uniform();
        s.add(kind == SeekKind::aap_single ? std::fabs(r - 0.5)
                                           : std::min(std::fabs(r - 0.25), std::fabs(r - 0.75)));
      }
      return s.estimate();
    }
    case SeekKind::aap_two_arm: {
      detail::SeekBatches b(samples);
      double a = 0.25;
      double other = 0.75;
      for (std::uint64_t i = 0; i < samples + kSeekBurnIn; ++i) {
        const double r = rng.uniform();
        const double d = std::min(std::fabs(r - a), std::fabs(r - other));
        if (i >= kSeekBurnIn) b.add(d);
        a = r;
        other = r < 0.5 ? r + 2 * (1 - r) / 3 : r / 3;
      }
      return b.estimate();
    }
    case SeekKind::ns_circle:
    case SeekKind::ns_line: {
      detail::SeekBatches b(samples);
      double s1 = 0.25;
      double s2 = 0.75;
      const bool circle = kind == SeekKind::ns_circle;
      for (std::uint64_t i = 0; i < samples + kSeekBurnIn; ++i) {
        const double r = rng.uniform();
        const double d1 = circle ? detail::circle_distance(r, s1) : std::fabs(r - s1);
        const double d2 = circle ? detail::circle_distance(r, s2) : std::fabs(r - s2);
        double d;
        if (d1 <= d2) {
          d = d1;
          s1 = r;
        } else {
          d = d2;
          s2 = r;
        }
        if (i >= kSeekBurnIn) b.add(d);
      }
      return b.estimate();
    }
    case SeekKind::two_head: {
      // Heads at x and x + 1/2, both kept on the surface.
      detail::SeekBatches b(samples);
      double x = 0.25;
      for (std::uint64_t i = 0; i < samples + kSeekBurnIn; ++i) {
        const double r = rng.uniform();
        const double next = r < 0.5 ? r : r - 0.5;
        if (i >= kSeekBurnIn) b.add(std::fabs(next - x));
        x = next;
      }
      return b.estimate();
    }
  }
  throw ValidationError("seek.kind", "unknown seek kind");
}

// ---------------------------------------------------------------------------
// Access time of a disk in ms: seek + rotational latency + transfer.

struct DiskModel {
  int cylinders = 10000;
  double t_rot = 8.33;
  double settle = 1.5;           // seek for 1 <= d <= 100
  double sqrt_base = 1.0;        // a + b sqrt(d) up to (C-1)/3
  double sqrt_coef = 0.12;
  double linear_slope = 0.0012;  // ms per cylinder beyond (C-1)/3
  double sectors_per_track = 400;
  double block_sectors = 8;

  void validate() const {
    if (cylinders < 2) throw ValidationError("disk.cylinders", "must be at least 2");
    if (!(t_rot > 0)) throw ValidationError("disk.t_rot", "must be positive");
    if (settle < 0 || sqrt_base < 0 || sqrt_coef < 0 || linear_slope < 0)
      throw ValidationError("disk.seek", "coefficients must be nonnegative");
    if (!(sectors_per_track > 0) || block_sectors < 0)
      throw ValidationError("disk.sectors", "must be positive");
  }

  double seek_time(int distance) const {
    const int d = std::abs(distance);
    if (d == 0) return 0;
    if (d <= 100) return settle;
    const double knee = (cylinders - 1) / 3.0;
    if (d <= knee) return sqrt_base + sqrt_coef * std::sqrt(static_cast<double>(d));
    return sqrt_base + sqrt_coef * std::sqrt(knee) + linear_slope * (d - knee);
  }

  double transfer_time() const { return block_sectors / sectors_per_track * t_rot; }

  // Mean access time for uniform requests from a uniform arm position.
  double mean_access_time() const {
    double seek = 0;
    const double c = cylinders;
    for (int d = 1; d < cylinders; ++d) seek += 2 * (c - d) / (c * c) * seek_time(d);
    return seek + t_rot / 2 + transfer_time();
  }
};

}  // namespace mirrorlab
