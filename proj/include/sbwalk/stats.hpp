#ifndef SBWALK_STATS_HPP
#define SBWALK_STATS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "sbwalk/errors.hpp"

namespace sbwalk {

// Linear-interpolation percentile (numpy convention), p in [0,1].
inline double percentile(std::vector<double> values, double p) {
  SBWALK_ASSERT(!values.empty(), "percentile of empty sample");
  SBWALK_ASSERT(p >= 0.0 && p <= 1.0, "percentile fraction outside [0,1]");
  std::sort(values.begin(), values.end());
  const double pos = p * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

inline double median(std::vector<double> values) {
  return percentile(std::move(values), 0.5);
}

struct MeanSe {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t count = 0;
};

inline MeanSe mean_and_se(const std::vector<double>& values) {
  MeanSe out;
  out.count = values.size();
  if (values.empty()) return out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  if (values.size() < 2) return out;
  double ss = 0.0;
  for (double v : values) {
    const double d = v - out.mean;
    ss += d * d;
  }
  const double var = ss / static_cast<double>(values.size() - 1);
  out.std_error = std::sqrt(var / static_cast<double>(values.size()));
  return out;
}

// Standard error of a binomial fraction estimate successes/trials.
inline double binomial_std_error(std::size_t successes, std::size_t trials) {
  SBWALK_ASSERT(trials > 0, "binomial_std_error with zero trials");
  const double p = static_cast<double>(successes) / static_cast<double>(trials);
  return std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
}

}  // namespace sbwalk

#endif  // SBWALK_STATS_HPP
