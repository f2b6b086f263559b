#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace palmtess {

/// Welford accumulator; `merge` combines partial results (Chan et al.).
class RunningStats {
 public:
  void add(double x) noexcept {
    ++n_;
    double d = x - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (x - mean_);
  }
  void merge(const RunningStats& o) noexcept {
    if (o.n_ == 0) return;
    if (n_ == 0) {
      *this = o;
      return;
    }
    double n = static_cast<double>(n_ + o.n_);
    double d = o.mean_ - mean_;
    mean_ += d * static_cast<double>(o.n_) / n;
    m2_ += o.m2_ + d * d * static_cast<double>(n_) * static_cast<double>(o.n_) / n;
    n_ += o.n_;
  }
  std::uint64_t count() const noexcept { return n_; }
  double mean() const noexcept { return mean_; }
  double variance() const noexcept { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
  double stderr_mean() const noexcept {
    return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
  }

 private:
  std::uint64_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

/// Universal Monte Carlo result record.
struct EstimateReport {
  std::string name;
  double estimate = 0.0;
  double std_error = 0.0;
  std::uint64_t n_replicates = 0;
  std::uint64_t seed = 0;
  double discard_fraction = 0.0;
  double m_hat = std::nan("");
  /// Running means at n/8, n/4, n/2, n replicates (finiteness diagnostic).
  std::vector<double> running_mean;

  bool within(double target, double k_se) const {
    return std::abs(estimate - target) <= k_se * std_error;
  }
};

/// Ratio estimator sum(y)/sum(x) over replicate pairs with a delta-method standard error.
struct RatioEstimate {
  double value = 0.0;
  double std_error = 0.0;
};
RatioEstimate ratio_estimate(const std::vector<double>& y, const std::vector<double>& x);

/// Standard error of the mean of a correlated series by non-overlapping batch means.
double batch_means_stderr(const std::vector<double>& series, std::size_t batches = 20);

/// Mean and standard error of a sample.
RunningStats summarize(const std::vector<double>& xs);

/// Resolves a worker request (0 = hardware concurrency).
unsigned resolve_workers(unsigned requested);

/// Runs fn(i) for i in [0, n) on `workers` threads. Results must be stored by index, so the
/// outcome does not depend on scheduling.
void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& fn);

/// Standard error of the difference of two independent estimates.
inline double combined_stderr(double se1, double se2) { return std::sqrt(se1 * se1 + se2 * se2); }

}  // namespace palmtess
