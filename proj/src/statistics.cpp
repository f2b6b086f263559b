#include "palmtess/statistics.hpp"

#include <atomic>
#include <exception>
#include <mutex>

namespace palmtess {

RatioEstimate ratio_estimate(const std::vector<double>& y, const std::vector<double>& x) {
  RatioEstimate r;
  const std::size_t n = std::min(y.size(), x.size());
  double sy = 0.0, sx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sy += y[i];
    sx += x[i];
  }
  if (sx == 0.0) return r;
  r.value = sy / sx;
  if (n < 2) return r;
  double xbar = sx / static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double e = y[i] - r.value * x[i];
    ss += e * e;
  }
  r.std_error = std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n)) / xbar;
  return r;
}

double batch_means_stderr(const std::vector<double>& series, std::size_t batches) {
  if (series.size() < 2 * batches || batches < 2) return summarize(series).stderr_mean();
  const std::size_t len = series.size() / batches;
  RunningStats bm;
  for (std::size_t b = 0; b < batches; ++b) {
    double s = 0.0;
    for (std::size_t k = 0; k < len; ++k) s += series[b * len + k];
    bm.add(s / static_cast<double>(len));
  }
  return bm.stderr_mean();
}

RunningStats summarize(const std::vector<double>& xs) {
  RunningStats s;
  for (double x : xs) s.add(x);
  return s;
}

unsigned resolve_workers(unsigned requested) {
  if (requested > 0) return requested;
  unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& fn) {
  workers = std::min<unsigned>(resolve_workers(workers), static_cast<unsigned>(std::max<std::size_t>(n, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex err_mu;
  auto body = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!first_error) first_error = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace palmtess
