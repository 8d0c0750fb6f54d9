#include "hinscreen/event_study.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "hinscreen/stats.hpp"
#include "hinscreen/tsv.hpp"

namespace hinscreen {

void PriceSeries::validate() const {
  if (dates.size() != closes.size()) {
    throw std::invalid_argument("price series " + symbol + ": dates and closes differ in length");
  }
  for (std::size_t i = 0; i < dates.size(); ++i) {
    if (!(closes[i] > 0.0) || !std::isfinite(closes[i])) {
      throw std::invalid_argument("price series " + symbol + ": non-positive close at " +
                                  dates[i].to_string());
    }
    if (i > 0 && !(dates[i - 1] < dates[i])) {
      throw std::invalid_argument("price series " + symbol + ": dates not strictly increasing at " +
                                  dates[i].to_string());
    }
  }
}

std::vector<PriceSeries> load_price_file(const std::string& path) {
  std::map<std::string, std::vector<std::pair<Date, double>>> rows;
  tsv::for_each_line(path, [&](std::size_t lineno, std::string_view line) {
    if (line.empty() || line[0] == '#') return;
    auto fields = tsv::split(line);
    auto fail = [&](const std::string& msg) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + msg);
    };
    if (fields.size() != 3) fail("expected 3 fields: symbol, date, close");
    auto date = Date::parse(fields[1]);
    if (!date) fail("bad date");
    double close;
    if (!tsv::parse_double(fields[2], close) || !(close > 0.0)) fail("bad close price");
    if (fields[0].empty()) fail("empty symbol");
    rows[std::string(fields[0])].emplace_back(*date, close);
  });

  std::vector<PriceSeries> out;
  out.reserve(rows.size());
  for (auto& [symbol, points] : rows) {
    std::sort(points.begin(), points.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    PriceSeries series;
    series.symbol = symbol;
    series.dates.reserve(points.size());
    series.closes.reserve(points.size());
    for (const auto& [date, close] : points) {
      series.dates.push_back(date);
      series.closes.push_back(close);
    }
    series.validate();
    out.push_back(std::move(series));
  }
  return out;
}

namespace {

// Nearest trading-day index; the earlier day wins a distance tie. Requires
// the date to lie within [dates.front(), dates.back()].
std::size_t nearest_index(const std::vector<Date>& dates, Date date) {
  auto it = std::lower_bound(dates.begin(), dates.end(), date);
  if (it == dates.begin()) return 0;
  if (it == dates.end()) return dates.size() - 1;
  const auto after = static_cast<std::size_t>(it - dates.begin());
  const auto before = after - 1;
  const auto gap_before = date - dates[before];
  const auto gap_after = dates[after] - date;
  return gap_before <= gap_after ? before : after;
}

}  // namespace

std::pair<ReturnSample, ReturnSample> window_log_returns(const PriceSeries& series,
                                                         const std::vector<Date>& event_dates,
                                                         int window,
                                                         std::vector<std::string>* warnings) {
  if (window < 2 || window % 2 != 0) {
    throw std::invalid_argument("window must be an even number of trading days, >= 2");
  }
  series.validate();
  const std::size_t n = series.dates.size();
  const auto w = static_cast<std::size_t>(window);
  if (n < w + 1) throw std::invalid_argument("price series shorter than one window");
  const std::size_t half = w / 2;

  auto warn = [&](const std::string& msg) {
    if (warnings) warnings->push_back(msg);
  };

  ReturnSample with{"with_news", {}};
  ReturnSample without{"without_news", {}};

  std::vector<std::size_t> centers;
  for (Date date : event_dates) {
    if (date < series.dates.front() || series.dates.back() < date) {
      warn(series.symbol + ": event " + date.to_string() + " outside series range, skipped");
      continue;
    }
    centers.push_back(nearest_index(series.dates, date));
  }
  std::sort(centers.begin(), centers.end());
  centers.erase(std::unique(centers.begin(), centers.end()), centers.end());

  for (std::size_t e : centers) {
    if (e < half || e + half >= n) {
      warn(series.symbol + ": window does not fit around " + series.dates[e].to_string() +
           ", return skipped");
      continue;
    }
    with.values.push_back(std::log(series.closes[e + half] / series.closes[e - half]));
  }

  // A span [s, s+w] is clean when it overlaps no event window [e-half, e+half];
  // skipped-for-fit events still block their neighborhood.
  for (std::size_t s = 0; s + w < n; ++s) {
    bool clean = true;
    for (std::size_t e : centers) {
      const std::size_t lo = e >= half ? e - half : 0;
      if (s <= e + half && lo <= s + w) {
        clean = false;
        break;
      }
    }
    if (clean) without.values.push_back(std::log(series.closes[s + w] / series.closes[s]));
  }
  return {std::move(with), std::move(without)};
}

SampleStats sample_stats(std::span<const double> values, std::span<const double> levels) {
  if (values.size() < 3) throw std::invalid_argument("sample too small (need >= 3 values)");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  SampleStats out;
  out.count = values.size();
  out.quantiles.reserve(levels.size());
  for (double level : levels) {
    out.quantiles.emplace_back(level, stats::sorted_quantile(sorted, level));
  }
  out.skewness = stats::adjusted_skewness(values);
  return out;
}

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("empty sample");
  std::vector<double> sa(a.begin(), a.end());
  std::vector<double> sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());

  const auto n1 = static_cast<double>(sa.size());
  const auto n2 = static_cast<double>(sb.size());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < sa.size() && j < sb.size()) {
    const double xa = sa[i], xb = sb[j];
    if (xa <= xb) {
      while (i < sa.size() && sa[i] == xa) ++i;
    }
    if (xb <= xa) {
      while (j < sb.size() && sb[j] == xb) ++j;
    }
    d = std::max(d, std::abs(static_cast<double>(i) / n1 - static_cast<double>(j) / n2));
  }

  KsResult result;
  result.d = d;
  if (d == 0.0) {
    result.p_value = 1.0;
    return result;
  }
  const double en = std::sqrt(n1 * n2 / (n1 + n2));
  const double lambda = (en + 0.12 + 0.11 / en) * d;
  // Kolmogorov tail Q(lambda) = 2 sum_k (-1)^{k-1} exp(-2 k^2 lambda^2).
  const double a2 = -2.0 * lambda * lambda;
  double sum = 0.0, fac = 2.0, prev_term = 0.0;
  bool converged = false;
  for (int k = 1; k <= 100; ++k) {
    const double term = fac * std::exp(a2 * static_cast<double>(k) * static_cast<double>(k));
    sum += term;
    if (std::abs(term) <= 0.001 * prev_term || std::abs(term) <= 1e-16 * std::abs(sum)) {
      converged = true;
      break;
    }
    fac = -fac;
    prev_term = std::abs(term);
  }
  result.p_value = converged ? std::clamp(sum, 0.0, 1.0) : 1.0;
  return result;
}

}  // namespace hinscreen
