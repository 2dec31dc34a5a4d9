#pragma once

// Discrete-event simulation of one disk or a mirrored pair: Poisson arrivals,
// read routing, optional read priority, and rebuild as vacations (VSM) or as
// a permanent customer (PCM).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <queue>
#include <string>
#include <string_view>
#include <vector>

#include "mirrorlab/errors.hpp"
#include "mirrorlab/random.hpp"
#include "mirrorlab/rational.hpp"
#include "mirrorlab/seek.hpp"
#include "mirrorlab/stats.hpp"

namespace mirrorlab {

struct ServiceSpec {
  enum class Kind { exponential, deterministic, disk };
  Kind kind = Kind::exponential;
  double mean = 1;
  DiskModel disk;

  static ServiceSpec exponential(double mean) { return {Kind::exponential, mean, {}}; }
  static ServiceSpec deterministic(double mean) { return {Kind::deterministic, mean, {}}; }
  static ServiceSpec parametric(const DiskModel& d) { return {Kind::disk, d.mean_access_time(), d}; }

  double mean_time() const { return kind == Kind::disk ? disk.mean_access_time() : mean; }

  void validate(const std::string& path) const {
    if (kind == Kind::disk) {
      disk.validate();
    } else if (!(mean > 0)) {
      throw ValidationError(path + ".mean", "must be positive");
    }
  }
};

enum class Routing { uniform, round_robin, jsq, shared };
enum class RebuildMode { none, vsm, pcm };

inline std::string_view routing_name(Routing r) {
  switch (r) {
    case Routing::uniform: return "uniform";
    case Routing::round_robin: return "round_robin";
    case Routing::jsq: return "jsq";
    case Routing::shared: return "shared";
  }
  return "uniform";
}

inline Routing parse_routing(std::string_view s) {
  for (Routing r : {Routing::uniform, Routing::round_robin, Routing::jsq, Routing::shared}) {
    if (routing_name(r) == s) return r;
  }
  throw ValidationError("sim.routing", "unknown routing '" + std::string(s) + "'");
}

inline std::string_view rebuild_name(RebuildMode m) {
  switch (m) {
    case RebuildMode::none: return "none";
    case RebuildMode::vsm: return "vsm";
    case RebuildMode::pcm: return "pcm";
  }
  return "none";
}

inline RebuildMode parse_rebuild(std::string_view s) {
  for (RebuildMode m : {RebuildMode::none, RebuildMode::vsm, RebuildMode::pcm}) {
    if (rebuild_name(m) == s) return m;
  }
  throw ValidationError("sim.rebuild", "unknown rebuild mode '" + std::string(s) + "'");
}

struct DesConfig {
  double arrival_rate = 0.5;
  double read_fraction = 1;
  ServiceSpec read = ServiceSpec::exponential(1);
  ServiceSpec write = ServiceSpec::exponential(1);
  int disks = 1;  // writes go to every disk, reads are routed to one
  Routing routing = Routing::uniform;
  bool priority_reads = false;
  RebuildMode rebuild = RebuildMode::none;
  double track_time = 8.33;  // one rebuild read
  std::uint64_t tracks = 0;  // 0: rebuild never completes (steady state)
  std::uint64_t arrivals = 1'000'000;
  std::uint64_t warmup = 10'000;
  std::uint64_t batches = 30;
  std::uint64_t replications = 20;  // des_rebuild only
  std::uint64_t max_in_system = 200'000;
  std::uint64_t seed = 1;

  void validate() const {
    if (!(arrival_rate >= 0)) throw ValidationError("sim.arrival_rate", "must be nonnegative");
    if (read_fraction < 0 || read_fraction > 1) throw ValidationError("sim.read_fraction", "must lie in [0, 1]");
    read.validate("sim.read");
    write.validate("sim.write");
    if (disks < 1 || disks > 2) throw ValidationError("sim.disks", "must be 1 or 2");
    if (rebuild != RebuildMode::none && disks != 1)
      throw ValidationError("sim.rebuild", "rebuild runs on the single surviving disk (disks = 1)");
    if (rebuild != RebuildMode::none && !(track_time > 0))
      throw ValidationError("sim.track_time", "must be positive");
    if (arrivals < 1) throw ValidationError("sim.arrivals", "must be at least 1");
    if (batches < 2) throw ValidationError("sim.batches", "must be at least 2");
    if (replications < 2) throw ValidationError("sim.replications", "must be at least 2");
  }

  // Offered utilization of the busiest disk, excluding rebuild work.
  double offered_utilization() const {
    const double reads = arrival_rate * read_fraction * read.mean_time() / disks;
    const double writes = arrival_rate * (1 - read_fraction) * write.mean_time();
    return reads + writes;
  }
};

namespace detail {

inline Estimate batch_estimate(const std::vector<double>& xs, std::uint64_t batches) {
  if (xs.empty()) return {};
  if (xs.size() < 2 * batches) {
    RunningStats s;
    for (double x : xs) s.add(x);
    return s.estimate();
  }
  const std::size_t per = xs.size() / batches;
  std::vector<double> means;
  for (std::uint64_t b = 0; b < batches; ++b) {
    double sum = 0;
    for (std::size_t i = b * per; i < (b + 1) * per; ++i) sum += xs[i];
    means.push_back(sum / static_cast<double>(per));
  }
  Estimate e = batch_means(means);
  e.samples = xs.size();
  return e;
}

class DesRun {
 public:
  struct Outcome {
    std::vector<double> wait_read, wait_write, resp_read, resp_write;
    std::vector<double> seen;  // requests in system found by measured arrivals
    std::vector<double> area_batches, time_batches;
    double busy_time = 0;
    double measured_time = 0;
    std::optional<double> rebuild_done;
  };

  DesRun(const DesConfig& cfg, std::uint64_t stream, bool stop_at_rebuild)
      : cfg_(cfg), rng_(cfg.seed, stream), stop_at_rebuild_(stop_at_rebuild) {
    servers_.resize(static_cast<std::size_t>(cfg.disks));
    for (auto& s : servers_) s.arm = cfg.read.disk.cylinders / 2;
    tracks_left_ = cfg.tracks;
    per_batch_ = std::max<std::uint64_t>(1, (cfg.arrivals - std::min(cfg.arrivals - 1, cfg.warmup)) / cfg.batches);
  }

  Outcome run() {
    if (cfg_.rebuild == RebuildMode::pcm) servers_[0].fifo.push_back(kRebuildToken);
    schedule_arrival();
    start_all();
    while (!events_.empty()) {
      const Event e = events_.top();
      events_.pop();
      advance(e.time);
      if (e.server < 0) {
        on_arrival();
      } else {
        on_departure(static_cast<std::size_t>(e.server));
      }
      if (stop_at_rebuild_ && out_.rebuild_done) break;
      if (!stop_at_rebuild_ && arrived_ >= cfg_.arrivals && in_system_ == 0) break;
    }
    if (stop_at_rebuild_) close_batch();
    return std::move(out_);
  }

 private:
  static constexpr std::int64_t kRebuildToken = -1;

  struct Event {
    double time;
    std::uint64_t seq;
    int server;  // -1 arrival
    bool operator>(const Event& o) const { return time != o.time ? time > o.time : seq > o.seq; }
  };

  struct Request {
    double arrival;
    bool read;
    bool measured;
    std::uint8_t remaining;
  };

  struct Server {
    std::deque<std::int64_t> fifo;   // everything, or writes under priority
    std::deque<std::int64_t> reads;  // reads under priority
    bool busy = false;
    std::int64_t current = 0;
    int arm = 0;
    double started = 0;
    std::size_t backlog() const { return fifo.size() + reads.size() + (busy ? 1 : 0); }
  };

  void push_event(double t, int server) { events_.push({t, seq_++, server}); }

  void schedule_arrival() {
    if (arrived_ >= cfg_.arrivals) return;
    if (stop_at_rebuild_ && out_.rebuild_done) return;
    if (cfg_.arrival_rate <= 0) return;
    push_event(now_ + rng_.exponential(cfg_.arrival_rate), -1);
  }

  void advance(double t) {
    const double dt = t - now_;
    if (measuring_) {
      area_ += dt * static_cast<double>(in_system_);
      out_.measured_time += dt;
      for (const auto& s : servers_) {
        if (s.busy) out_.busy_time += dt / static_cast<double>(servers_.size());
      }
    }
    now_ = t;
  }

  void close_batch() {
    if (!measuring_ || now_ <= batch_start_) return;
    out_.area_batches.push_back(area_);
    out_.time_batches.push_back(now_ - batch_start_);
    area_ = 0;
    batch_start_ = now_;
  }

  double service_time(Server& s, bool read) {
    const ServiceSpec& spec = read ? cfg_.read : cfg_.write;
    switch (spec.kind) {
      case ServiceSpec::Kind::exponential: return rng_.exponential(1 / spec.mean);
      case ServiceSpec::Kind::deterministic: return spec.mean;
      case ServiceSpec::Kind::disk: {
        const auto& d = spec.disk;
        const int target = static_cast<int>(rng_.below(static_cast<std::uint64_t>(d.cylinders)));
        const double t = d.seek_time(target - s.arm) + rng_.uniform() * d.t_rot + d.transfer_time();
        s.arm = target;
        return t;
      }
    }
    return spec.mean;
  }

  void enqueue(std::size_t server, std::int64_t job, bool read) {
    Server& s = servers_[server];
    if (cfg_.priority_reads && read) {
      s.reads.push_back(job);
    } else {
      s.fifo.push_back(job);
    }
  }

  std::size_t route_read() {
    const std::size_t n = servers_.size();
    if (n == 1) return 0;
    switch (cfg_.routing) {
      case Routing::uniform: return static_cast<std::size_t>(rng_.below(n));
      case Routing::round_robin: return static_cast<std::size_t>(rr_++ % n);
      case Routing::jsq: {
        std::size_t best = 0;
        for (std::size_t i = 1; i < n; ++i) {
          if (servers_[i].backlog() < servers_[best].backlog()) best = i;
        }
        return best;
      }
      case Routing::shared: return 0;
    }
    return 0;
  }

  void on_arrival() {
    const std::uint64_t index = arrived_++;
    const bool measured = index >= cfg_.warmup;
    if (measured && !measuring_) {
      measuring_ = true;
      batch_start_ = now_;
    }
    if (measured) {
      out_.seen.push_back(static_cast<double>(in_system_));
      if (++in_batch_ == per_batch_) {
        close_batch();
        in_batch_ = 0;
      }
    }
    const bool read = rng_.uniform() < cfg_.read_fraction;
    const auto id = static_cast<std::int64_t>(requests_.size());
    const bool fanout = !read && servers_.size() > 1;
    requests_.push_back({now_, read, measured, static_cast<std::uint8_t>(fanout ? servers_.size() : 1)});
    ++in_system_;
    if (in_system_ > cfg_.max_in_system) {
      throw InstabilityError("queue grew past " + std::to_string(cfg_.max_in_system) + " requests at t=" +
                             format_sig(now_) + " (offered utilization " +
                             format_sig(cfg_.offered_utilization()) + ")");
    }
    if (fanout) {
      for (std::size_t s = 0; s < servers_.size(); ++s) enqueue(s, id, false);
    } else if (read && cfg_.routing == Routing::shared && servers_.size() > 1) {
      shared_.push_back(id);
    } else {
      enqueue(read ? route_read() : 0, id, read);
    }
    start_all();
    schedule_arrival();
  }

  std::optional<std::int64_t> take(Server& s) {
    for (auto* q : {&s.reads, &s.fifo}) {
      if (!q->empty()) {
        const auto j = q->front();
        q->pop_front();
        return j;
      }
    }
    if (!shared_.empty()) {
      const auto j = shared_.front();
      shared_.pop_front();
      return j;
    }
    return std::nullopt;
  }

  bool rebuild_pending() const { return cfg_.tracks == 0 || tracks_left_ > 0; }

  void start(std::size_t idx) {
    Server& s = servers_[idx];
    if (s.busy) return;
    auto job = take(s);
    if (!job && cfg_.rebuild == RebuildMode::vsm && idx == 0 && rebuild_pending()) job = kRebuildToken;
    if (!job) return;
    s.busy = true;
    s.current = *job;
    s.started = now_;
    double duration;
    if (*job == kRebuildToken) {
      duration = cfg_.track_time;
    } else {
      Request& r = requests_[static_cast<std::size_t>(*job)];
      if (r.measured) (r.read ? out_.wait_read : out_.wait_write).push_back(now_ - r.arrival);
      duration = service_time(s, r.read);
    }
    push_event(now_ + duration, static_cast<int>(idx));
  }

  void start_all() {
    for (std::size_t i = 0; i < servers_.size(); ++i) start(i);
  }

  void on_departure(std::size_t idx) {
    Server& s = servers_[idx];
    s.busy = false;
    if (s.current == kRebuildToken) {
      if (cfg_.tracks > 0 && --tracks_left_ == 0) out_.rebuild_done = now_;
      if (cfg_.rebuild == RebuildMode::pcm && rebuild_pending()) s.fifo.push_back(kRebuildToken);
    } else {
      Request& r = requests_[static_cast<std::size_t>(s.current)];
      if (--r.remaining == 0) {
        --in_system_;
        if (r.measured) (r.read ? out_.resp_read : out_.resp_write).push_back(now_ - r.arrival);
      }
    }
    start_all();
  }

  const DesConfig& cfg_;
  RandomStream rng_;
  bool stop_at_rebuild_;
  std::priority_queue<Event, std::vector<Event>, std::greater<>> events_;
  std::uint64_t seq_ = 0;
  double now_ = 0;
  std::vector<Server> servers_;
  std::deque<std::int64_t> shared_;
  std::vector<Request> requests_;
  std::uint64_t arrived_ = 0;
  std::uint64_t in_system_ = 0;
  std::uint64_t rr_ = 0;
  std::uint64_t tracks_left_ = 0;
  bool measuring_ = false;
  double area_ = 0;
  double batch_start_ = 0;
  std::uint64_t per_batch_ = 1;
  std::uint64_t in_batch_ = 0;
  Outcome out_;
};

inline std::vector<double> concat(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> r = a;
  r.insert(r.end(), b.begin(), b.end());
  return r;
}

inline void check_offered_load(const DesConfig& cfg) {
  const double rho = cfg.offered_utilization();
  if (rho >= 1) throw InstabilityError("offered utilization " + format_sig(rho) + " is not below 1");
}

}  // namespace detail

// Steady-state waits and responses by batch means. Metrics: W, W_read,
// W_write, R, R_read, R_write, L_time, L_arrival, utilization.
inline SimResult des_queue(const DesConfig& cfg) {
  cfg.validate();
  detail::check_offered_load(cfg);
  detail::DesRun sim(cfg, 0, false);
  auto o = sim.run();
  SimResult res;
  res.seed = cfg.seed;
  const auto b = cfg.batches;
  res.set("W", detail::batch_estimate(detail::concat(o.wait_read, o.wait_write), b));
  res.set("W_read", detail::batch_estimate(o.wait_read, b));
  res.set("W_write", detail::batch_estimate(o.wait_write, b));
  res.set("R", detail::batch_estimate(detail::concat(o.resp_read, o.resp_write), b));
  res.set("R_read", detail::batch_estimate(o.resp_read, b));
  res.set("R_write", detail::batch_estimate(o.resp_write, b));
  std::vector<double> lt;
  for (std::size_t i = 0; i < o.area_batches.size(); ++i) lt.push_back(o.area_batches[i] / o.time_batches[i]);
  res.set("L_time", lt.size() > 1 ? batch_means(lt) : Estimate{lt.empty() ? 0 : lt[0], 0, 0, lt.size()});
  res.set("L_arrival", detail::batch_estimate(o.seen, b));
  const double util = o.measured_time > 0 ? o.busy_time / o.measured_time : 0;
  res.set("utilization", Estimate{util, 0, 0, 1});
  return res;
}

// Replications until the rebuild finishes. Metrics: T_rebuild, W, R (means
// over replications with Student-t intervals).
inline SimResult des_rebuild(const DesConfig& cfg) {
  cfg.validate();
  if (cfg.rebuild == RebuildMode::none) throw ValidationError("sim.rebuild", "choose vsm or pcm");
  if (cfg.tracks == 0) throw ValidationError("sim.tracks", "must be positive for a rebuild run");
  detail::check_offered_load(cfg);
  DesConfig c = cfg;
  c.warmup = 0;
  std::vector<double> t, w, r;
  for (std::uint64_t rep = 0; rep < cfg.replications; ++rep) {
    detail::DesRun sim(c, rep, true);
    auto o = sim.run();
    if (!o.rebuild_done) throw InstabilityError("rebuild did not complete");
    t.push_back(*o.rebuild_done);
    const auto ws = detail::concat(o.wait_read, o.wait_write);
    const auto rs = detail::concat(o.resp_read, o.resp_write);
    if (!ws.empty()) {
      RunningStats a;
      for (double x : ws) a.add(x);
      w.push_back(a.mean());
    }
    if (!rs.empty()) {
      RunningStats a;
      for (double x : rs) a.add(x);
      r.push_back(a.mean());
    }
  }
  SimResult res;
  res.seed = cfg.seed;
  res.set("T_rebuild", batch_means(t));
  res.set("W", batch_means(w));
  res.set("R", batch_means(r));
  return res;
}

}  // namespace mirrorlab
