#include "hinscreen/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace hinscreen {

namespace {

void check_inputs(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size()) {
    throw std::invalid_argument("scores and labels differ in length");
  }
  if (scores.empty()) throw std::invalid_argument("empty score vector");
  for (double s : scores) {
    if (!std::isfinite(s)) throw std::invalid_argument("non-finite score");
  }
  for (std::uint8_t l : labels) {
    if (l > 1) throw std::invalid_argument("labels must be 0 or 1");
  }
}

}  // namespace

double auc_roc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  check_inputs(scores, labels);
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Average ascending ranks within tie groups; sum them over positives.
  double rank_sum_pos = 0.0;
  std::size_t n_pos = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]]) {
        rank_sum_pos += avg_rank;
        ++n_pos;
      }
    }
    i = j;
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) throw std::runtime_error("degenerate labels");
  const double u = rank_sum_pos - static_cast<double>(n_pos) * (static_cast<double>(n_pos) + 1.0) / 2.0;
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double auc_pr(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  check_inputs(scores, labels);
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  double total_pos = 0.0;
  for (std::uint8_t l : labels) total_pos += l;
  if (total_pos == 0.0) throw std::runtime_error("no positives");

  double area = 0.0;
  double prev_tp = 0.0, prev_fp = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    double block_tp = 0.0, block_fp = 0.0;
    while (j < n && scores[order[j]] == scores[order[i]]) {
      if (labels[order[j]]) {
        block_tp += 1.0;
      } else {
        block_fp += 1.0;
      }
      ++j;
    }
    const double tp = prev_tp + block_tp;
    const double fp = prev_fp + block_fp;
    if (block_tp > 0.0) {
      // Subdivide the achievable segment at every integer TP; FP moves
      // linearly with TP inside it. At TP = 0 the precision of the first
      // subdivision point is reused, which makes the leading piece a
      // rectangle and keeps constant scores at exactly the prevalence.
      const double slope = block_fp / block_tp;
      for (double s = 1.0; s <= block_tp; s += 1.0) {
        const double cur_tp = prev_tp + s;
        const double cur_fp = prev_fp + s * slope;
        const double p_cur = cur_tp / (cur_tp + cur_fp);
        double p_before;
        if (cur_tp - 1.0 <= 0.0) {
          p_before = p_cur;
        } else {
          const double before_tp = cur_tp - 1.0;
          const double before_fp = prev_fp + (s - 1.0) * slope;
          p_before = before_tp / (before_tp + before_fp);
        }
        area += 0.5 * (p_before + p_cur) / total_pos;
      }
    }
    prev_tp = tp;
    prev_fp = fp;
    i = j;
  }
  return area;
}

EvalReport evaluate_category(const std::map<std::string, double>& scores,
                             const std::set<std::string>& candidates,
                             const std::set<std::string>& positives) {
  if (candidates.empty()) throw std::invalid_argument("empty candidate set");
  std::vector<double> s;
  std::vector<std::uint8_t> l;
  s.reserve(candidates.size());
  l.reserve(candidates.size());
  for (const auto& firm : candidates) {
    auto it = scores.find(firm);
    if (it == scores.end()) {
      throw std::invalid_argument("missing score for candidate: " + firm);
    }
    s.push_back(it->second);
    l.push_back(positives.count(firm) ? 1 : 0);
  }
  EvalReport report;
  report.n_candidates = s.size();
  report.n_positives = static_cast<std::size_t>(
      std::count(l.begin(), l.end(), std::uint8_t{1}));
  report.auc_roc = auc_roc(s, l);
  report.auc_pr = auc_pr(s, l);
  return report;
}

}  // namespace hinscreen
