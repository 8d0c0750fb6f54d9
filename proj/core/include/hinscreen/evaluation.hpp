#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>

namespace hinscreen {

struct EvalReport {
  std::string category;
  std::string method;
  double auc_roc = 0.0;
  double auc_pr = 0.0;
  std::size_t n_candidates = 0;
  std::size_t n_positives = 0;
};

// Exact Mann-Whitney statistic P(score+ > score-) + 0.5 P(tie), computed via
// average ranks. Throws "degenerate labels" unless both classes are present.
double auc_roc(std::span<const double> scores, std::span<const std::uint8_t> labels);

// Area under the precision-recall curve: descending-score sweep with tied
// scores handled as one block, false positives interpolated linearly in true
// positives between achievable points (unit-TP subdivision), area taken by
// trapezoid in recall. Constant scores give exactly the prevalence. Throws
// without a positive.
double auc_pr(std::span<const double> scores, std::span<const std::uint8_t> labels);

// Scores must cover every candidate; positives outside the candidate set are
// ignored. category/method tags are left for the caller to fill.
EvalReport evaluate_category(const std::map<std::string, double>& scores,
                             const std::set<std::string>& candidates,
                             const std::set<std::string>& positives);

}  // namespace hinscreen
