#pragma once

// Closed-form queueing metrics for mirrored pairs in normal, degraded and
// rebuild mode. Low-level functions take a rate and times in one consistent
// unit (requests per ms with times in ms, say).

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "mirrorlab/errors.hpp"
#include "mirrorlab/layout.hpp"
#include "mirrorlab/rational.hpp"

namespace mirrorlab {

struct ServiceMoments {
  double mean = 0;
  double second = 0;

  static ServiceMoments exponential(double mean) { return {mean, 2 * mean * mean}; }
  static ServiceMoments deterministic(double mean) { return {mean, mean * mean}; }
  static ServiceMoments from_cv2(double mean, double cv2) { return {mean, (1 + cv2) * mean * mean}; }

  double cv2() const { return (second - mean * mean) / (mean * mean); }
  // Mean residual service time x2/(2x).
  double residual() const { return second / (2 * mean); }

  void validate(const std::string& path = "moments") const {
    if (!(mean > 0)) throw ValidationError(path + ".mean", "must be positive");
    // A small tolerance keeps deterministic moments computed in floating point valid.
    if (second < mean * mean * (1 - 1e-12)) throw ValidationError(path + ".second", "below mean squared");
  }
};

// Array workload: Lambda requests per second spread over `pairs` mirrored
// pairs; service moments in ms.
struct WorkloadMix {
  double arrival_rate = 0;
  int pairs = 1;
  double read_fraction = 1;
  ServiceMoments read;
  ServiceMoments write;

  double write_fraction() const { return 1 - read_fraction; }
  // Per-pair arrival rate lambda, per ms.
  double pair_rate() const { return arrival_rate / pairs / 1000.0; }

  void validate() const {
    if (arrival_rate < 0) throw ValidationError("workload.arrival_rate", "must be nonnegative");
    if (pairs < 1) throw ValidationError("workload.pairs", "must be at least 1");
    if (read_fraction < 0 || read_fraction > 1) throw ValidationError("workload.read_fraction", "must lie in [0, 1]");
    read.validate("workload.read");
    write.validate("workload.write");
  }
};

inline void require_stable(double rho, const std::string& what) {
  if (!(rho < 1)) throw InstabilityError(what + ": utilization " + format_sig(rho) + " is not below 1");
}

// Pollaczek-Khinchine mean wait.
inline double mg1_wait(double lambda, const ServiceMoments& x) {
  x.validate();
  if (lambda < 0) throw ConstraintError("arrival rate must be nonnegative");
  const double rho = lambda * x.mean;
  require_stable(rho, "M/G/1");
  return lambda * x.second / (2 * (1 - rho));
}

struct DiskLoad {
  double lambda_d = 0;   // per-disk arrival rate (per ms)
  double rho_r = 0;
  double rho_w = 0;
  double rho = 0;
  ServiceMoments mix;    // per-disk access-time moments
};

// Per-disk load of a pair with reads split evenly and writes to both disks.
// `read_factor` scales the read share (1 normal, 2 for a lone BM survivor).
inline DiskLoad disk_load(const WorkloadMix& m, double read_factor = 1) {
  m.validate();
  const double lambda = m.pair_rate();
  const double fr = m.read_fraction * read_factor / 2;
  const double fw = m.write_fraction();
  DiskLoad d;
  d.lambda_d = lambda * (fr + fw);
  d.rho_r = lambda * fr * m.read.mean;
  d.rho_w = lambda * fw * m.write.mean;
  d.rho = d.rho_r + d.rho_w;
  if (fr + fw > 0) {
    const double pr = fr / (fr + fw);
    d.mix = {pr * m.read.mean + (1 - pr) * m.write.mean, pr * m.read.second + (1 - pr) * m.write.second};
  } else {
    d.mix = m.read;
  }
  return d;
}

struct PriorityResult {
  double wait_fcfs = 0;
  double wait_read = 0;
  double ratio = 0;
  double rho = 0;
  double rho_r = 0;
};

// Non-preemptive priority for reads over writes at one disk.
inline PriorityResult priority_read_wait(const WorkloadMix& m) {
  const DiskLoad d = disk_load(m);
  require_stable(d.rho_r, "read class");
  require_stable(d.rho, "disk");
  PriorityResult r;
  r.rho = d.rho;
  r.rho_r = d.rho_r;
  const double num = d.lambda_d * d.mix.second;
  r.wait_fcfs = num / (2 * (1 - d.rho));
  r.wait_read = num / (2 * (1 - d.rho_r));
  r.ratio = (1 - d.rho) / (1 - d.rho_r);
  return r;
}

enum class Mode { normal, degraded };

struct ModeMetrics {
  double rho_r = 0;
  double rho_w = 0;
  double rho = 0;
  double lambda_max = 0;   // per pair, requests per second
  double read_load_factor = 1;
};

// Utilizations and saturation rate. In degraded mode the read share of the
// surviving disk grows by 2 (BM) or n/(n-1) (ID cluster of n).
inline ModeMetrics mode_metrics(const WorkloadMix& m, Mode mode, LayoutKind layout = LayoutKind::bm,
                                int cluster_size = 2) {
  double factor = 1;
  if (mode == Mode::degraded) {
    if (layout == LayoutKind::bm) {
      factor = 2;
    } else if (layout == LayoutKind::id) {
      if (cluster_size < 2) throw ValidationError("cluster_size", "must be at least 2");
      factor = static_cast<double>(cluster_size) / (cluster_size - 1);
    } else {
      throw UnsupportedLayout("degraded metrics are defined for BM and ID");
    }
  }
  const DiskLoad d = disk_load(m, factor);
  ModeMetrics r;
  r.rho_r = d.rho_r;
  r.rho_w = d.rho_w;
  r.rho = d.rho;
  r.read_load_factor = factor;
  const double per_request = m.read_fraction * factor / 2 * m.read.mean + m.write_fraction() * m.write.mean;
  r.lambda_max = 1000.0 / per_request;
  return r;
}

// Mean read response with k of M pairs degraded.
inline double overall_read_response(int k, int pairs, double r_degraded, double r_normal) {
  if (pairs < 1 || k < 0 || k > pairs) throw ConstraintError("need 0 <= k <= M");
  const double share = static_cast<double>(k) / pairs;
  return share * r_degraded + (1 - share) * r_normal;
}

enum class ReadPolicy { uniform, uniform_degraded, round_robin, shared, duplicate_min };

inline std::string_view policy_name(ReadPolicy p) {
  switch (p) {
    case ReadPolicy::uniform: return "uniform";
    case ReadPolicy::uniform_degraded: return "uniform_degraded";
    case ReadPolicy::round_robin: return "round_robin";
    case ReadPolicy::shared: return "shared";
    case ReadPolicy::duplicate_min: return "duplicate_min";
  }
  return "uniform";
}

// Root below one of sigma^2 - (1 + 4 rho) sigma + 4 rho^2 = 0.
inline double erlang2_sigma(double rho) {
  if (rho < 0) throw ConstraintError("utilization must be nonnegative");
  require_stable(rho, "E2/M/1");
  return 0.5 * (1 + 4 * rho - std::sqrt(1 + 8 * rho));
}

struct ReadResponse {
  double response = 0;
  double wait = 0;
  std::optional<double> sigma;
};

// Pair receiving 2 lambda exponential reads with mean x; rho = lambda x.
inline ReadResponse mirrored_read_response(ReadPolicy policy, double lambda, double x) {
  if (!(x > 0) || lambda < 0) throw ConstraintError("need x > 0 and lambda >= 0");
  const double rho = lambda * x;
  ReadResponse r;
  switch (policy) {
    case ReadPolicy::uniform:
      require_stable(rho, "M/M/1");
      r.response = x / (1 - rho);
      break;
    case ReadPolicy::uniform_degraded:
      require_stable(2 * rho, "degraded M/M/1");
      r.response = x / (1 - 2 * rho);
      break;
    case ReadPolicy::round_robin: {
      const double s = erlang2_sigma(rho);
      r.sigma = s;
      r.wait = s * x / (1 - s);
      r.response = r.wait + x;
      return r;
    }
    case ReadPolicy::shared:
      require_stable(rho, "M/M/2");
      r.response = x / (1 - rho * rho);
      break;
    case ReadPolicy::duplicate_min:
      // Every read goes to both disks; the faster copy is taken.
      require_stable(2 * rho, "duplicated reads");
      r.response = x / (1 - 2 * rho) / 2;
      break;
  }
  r.wait = r.response - x;
  return r;
}

struct ForkJoinResult {
  double single = 0;     // R1
  double fork_join = 0;  // R1 (1.5 - rho/8)
  double bound = 0;      // H2 R1
};

inline ForkJoinResult forkjoin_write_response(double lambda, double x) {
  if (!(x > 0) || lambda < 0) throw ConstraintError("need x > 0 and lambda >= 0");
  const double rho = lambda * x;
  require_stable(rho, "M/M/1");
  ForkJoinResult r;
  r.single = x / (1 - rho);
  r.fork_join = r.single * (1.5 - rho / 8);
  r.bound = 1.5 * r.single;
  return r;
}

struct RebuildParams {
  double t_rot = 0;         // ms
  double tracks = 0;        // N_track
  ServiceMoments vacation;  // one rebuild read

  static RebuildParams track_reads(double t_rot, double tracks) {
    return {t_rot, tracks, ServiceMoments::deterministic(t_rot)};
  }

  void validate() const {
    if (!(t_rot > 0)) throw ValidationError("rebuild.t_rot", "must be positive");
    if (!(tracks > 0)) throw ValidationError("rebuild.tracks", "must be positive");
    vacation.validate("rebuild.vacation");
  }
};

struct VsmResult {
  double rho = 0;
  double wait_mg1 = 0;
  double wait_vsm = 0;
  double residual_vacation = 0;
  double delay_cycle = 0;
  double p = 0;
  double rebuilds_per_idle = 0;
  double cycle = 0;
  double rebuild_time = 0;          // tracks * cycle / n, n = 1/p
  double rebuild_time_busy = 0;     // tracks * v / (1 - rho): all idle time goes to rebuild
  std::vector<std::string> warnings;
};

// Vacationing-server rebuild: external requests at rate lambda, rebuild
// track reads as vacations taken whenever the queue empties.
inline VsmResult vsm_rebuild(double lambda, const ServiceMoments& x, const RebuildParams& rb) {
  x.validate();
  rb.validate();
  if (lambda < 0) throw ConstraintError("arrival rate must be nonnegative");
  VsmResult r;
  r.rho = lambda * x.mean;
  require_stable(r.rho, "rebuild disk");
  r.residual_vacation = rb.vacation.residual();
  r.wait_mg1 = lambda * x.second / (2 * (1 - r.rho));
  r.wait_vsm = r.wait_mg1 + r.residual_vacation;
  r.delay_cycle = (x.mean + r.residual_vacation) / (1 - r.rho);
  r.p = lambda * rb.t_rot;
  if (r.p >= 1) r.warnings.push_back("p = lambda*T_rot >= 1: rebuild reads starve");
  r.rebuild_time_busy = rb.tracks * rb.vacation.mean / (1 - r.rho);
  if (lambda == 0) {
    r.rebuilds_per_idle = INFINITY;
    r.cycle = INFINITY;
    r.rebuild_time = rb.tracks * rb.t_rot;
    return r;
  }
  r.rebuilds_per_idle = 1 / r.p;
  r.cycle = r.delay_cycle + 1 / lambda;
  r.rebuild_time = rb.tracks * r.cycle / r.rebuilds_per_idle;
  return r;
}

// Load increase of a clustered RAID with parity groups of G out of N disks.
inline Rational craid_alpha(int n, int g) {
  if (g < 2 || g > n) throw ConstraintError("need 2 <= G <= N");
  return Rational(g - 1, n - 1);
}

}  // namespace mirrorlab
