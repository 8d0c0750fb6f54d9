#include "hinscreen/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hinscreen::stats {

double sorted_quantile(std::span<const double> sorted, double level) {
  if (sorted.empty()) throw std::invalid_argument("quantile of empty sample");
  if (!(level >= 0.0 && level <= 1.0)) throw std::invalid_argument("quantile level outside [0,1]");
  const double h = level * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(h);
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

double quantile(std::vector<double> values, double level) {
  std::sort(values.begin(), values.end());
  return sorted_quantile(values, level);
}

double mean(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("mean of empty sample");
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double sample_sd(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  const double m = mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

double adjusted_skewness(std::span<const double> values) {
  const auto n = static_cast<double>(values.size());
  if (values.size() < 3) throw std::invalid_argument("skewness needs at least 3 values");
  const double m = mean(values);
  double m2 = 0.0, m3 = 0.0;
  for (double v : values) {
    const double d = v - m;
    m2 += d * d;
    m3 += d * d * d;
  }
  m2 /= n;
  m3 /= n;
  if (m2 == 0.0) return 0.0;
  const double g1 = m3 / std::pow(m2, 1.5);
  return g1 * std::sqrt(n * (n - 1.0)) / (n - 2.0);
}

}  // namespace hinscreen::stats
