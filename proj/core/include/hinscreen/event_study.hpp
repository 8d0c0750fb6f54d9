#pragma once

#include <array>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hinscreen/dates.hpp"

namespace hinscreen {

struct PriceSeries {
  std::string symbol;
  std::vector<Date> dates;    // strictly increasing trading days
  std::vector<double> closes; // positive, aligned with dates

  void validate() const;  // throws std::invalid_argument on a broken series
};

struct ReturnSample {
  std::string group;  // "with_news" | "without_news"
  std::vector<double> values;
};

struct SampleStats {
  std::size_t count = 0;
  std::vector<std::pair<double, double>> quantiles;  // (level, value), level-ascending
  double skewness = 0.0;
};

struct KsResult {
  double d = 0.0;
  double p_value = 1.0;
};

inline constexpr std::array<double, 5> kReportQuantiles{0.01, 0.05, 0.5, 0.95, 0.99};

// TSV rows: symbol <TAB> date <TAB> close. Rows may arrive unsorted; each
// series is sorted by date and validated. Returns series sorted by symbol.
std::vector<PriceSeries> load_price_file(const std::string& path);

// Each event date maps to the nearest trading day (earlier day wins a
// distance tie). The with-news sample takes log(p[e+w/2] / p[e-w/2]); events
// outside the series range or whose window does not fit are skipped with a
// warning. The without-news sample takes every w-span (all start offsets)
// that overlaps no in-range event window, including windows skipped for fit.
std::pair<ReturnSample, ReturnSample> window_log_returns(const PriceSeries& series,
                                                         const std::vector<Date>& event_dates,
                                                         int window,
                                                         std::vector<std::string>* warnings);

// Linear-interpolation quantiles plus adjusted Fisher-Pearson skewness.
// Requires at least 3 values.
SampleStats sample_stats(std::span<const double> values,
                         std::span<const double> levels = kReportQuantiles);

// Two-sample Kolmogorov-Smirnov: D = sup |F_a - F_b| over the empirical
// CDFs, asymptotic p-value with the standard effective-size scaling.
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

}  // namespace hinscreen
