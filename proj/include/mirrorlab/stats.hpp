#pragma once

// Running moments and confidence intervals.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

namespace mirrorlab {

struct Estimate {
  double mean = 0;
  double stderr_ = 0;
  double half_width = 0;  // 95% confidence half-width
  std::uint64_t samples = 0;

  double lower() const { return mean - half_width; }
  double upper() const { return mean + half_width; }
  bool covers(double x) const { return x >= lower() && x <= upper(); }
};

// Welford accumulator.
class RunningStats {
 public:
  void add(double x) {
    ++n_;
    const double d = x - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (x - mean_);
  }

  void merge(const RunningStats& o) {
    if (o.n_ == 0) return;
    if (n_ == 0) {
      *this = o;
      return;
    }
    const double total = static_cast<double>(n_ + o.n_);
    const double d = o.mean_ - mean_;
    mean_ += d * static_cast<double>(o.n_) / total;
    m2_ += o.m2_ + d * d * static_cast<double>(n_) * static_cast<double>(o.n_) / total;
    n_ += o.n_;
  }

  std::uint64_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
  double stddev() const { return std::sqrt(variance()); }
  double stderr_of_mean() const { return n_ > 0 ? stddev() / std::sqrt(static_cast<double>(n_)) : 0.0; }

  // Normal-approximation interval, 1.96 standard errors.
  Estimate estimate() const {
    return {mean_, stderr_of_mean(), 1.96 * stderr_of_mean(), n_};
  }

 private:
  std::uint64_t n_ = 0;
  double mean_ = 0;
  double m2_ = 0;
};

inline double student_t_quantile(double p, double dof) {
  return boost::math::quantile(boost::math::students_t(dof), p);
}

// Mean of batch means with a Student-t 95% interval.
inline Estimate batch_means(const std::vector<double>& batches) {
  RunningStats s;
  for (double b : batches) s.add(b);
  Estimate e{s.mean(), s.stderr_of_mean(), 0, s.count()};
  if (s.count() > 1) e.half_width = student_t_quantile(0.975, static_cast<double>(s.count() - 1)) * e.stderr_;
  return e;
}

// Named estimates from one simulation run.
struct SimResult {
  std::vector<std::pair<std::string, Estimate>> metrics;
  std::uint64_t seed = 0;
  std::vector<std::string> diagnostics;

  void set(const std::string& name, const Estimate& e) {
    for (auto& [k, v] : metrics) {
      if (k == name) {
        v = e;
        return;
      }
    }
    metrics.emplace_back(name, e);
  }

  bool has(const std::string& name) const {
    for (const auto& kv : metrics) {
      if (kv.first == name) return true;
    }
    return false;
  }

  const Estimate& at(const std::string& name) const {
    for (const auto& kv : metrics) {
      if (kv.first == name) return kv.second;
    }
    throw std::out_of_range("no metric " + name);
  }
};

}  // namespace mirrorlab
