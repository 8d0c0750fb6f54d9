#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <stdexcept>
#include <vector>

#include "hinscreen/evaluation.hpp"
#include "hinscreen/stats.hpp"
#include "oracles.hpp"

using namespace hinscreen;

namespace {

// Random scoring problem with deliberate ties: scores live on a coarse grid.
struct ScoredSet {
  std::vector<double> scores;
  std::vector<std::uint8_t> labels;
};

ScoredSet random_scored_set(std::mt19937_64& rng, std::size_t max_n) {
  ScoredSet s;
  const std::size_t n = 2 + rng() % (max_n - 1);
  s.scores.resize(n);
  s.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    s.scores[i] = static_cast<double>(rng() % 8) / 7.0;
    s.labels[i] = static_cast<std::uint8_t>(rng() & 1);
  }
  // Force both classes so the ROC side is always defined.
  s.labels[0] = 1;
  s.labels[n - 1] = 0;
  return s;
}

}  // namespace

TEST_CASE("ranking metric on hand-checked fixtures") {
  SUBCASE("perfect separation scores one") {
    std::vector<double> s{0.9, 0.8, 0.2, 0.1};
    std::vector<std::uint8_t> l{1, 1, 0, 0};
    CHECK(auc_roc(s, l) == doctest::Approx(1.0).epsilon(1e-15));
  }
  SUBCASE("constant scores land at one half") {
    std::vector<double> s{0.4, 0.4, 0.4, 0.4, 0.4};
    std::vector<std::uint8_t> l{1, 0, 1, 0, 0};
    CHECK(auc_roc(s, l) == doctest::Approx(0.5).epsilon(1e-15));
  }
  SUBCASE("interleaved fixture") {
    // Pairs: (0.9,0.8) win, (0.9,0.1) win, (0.7,0.8) loss, (0.7,0.1) win.
    std::vector<double> s{0.9, 0.8, 0.7, 0.1};
    std::vector<std::uint8_t> l{1, 0, 1, 0};
    CHECK(auc_roc(s, l) == doctest::Approx(0.75).epsilon(1e-15));
  }
  SUBCASE("negating tie-free scores mirrors the value") {
    std::vector<double> s{0.91, 0.82, 0.73, 0.14, 0.05};
    std::vector<std::uint8_t> l{1, 0, 1, 0, 1};
    const double forward = auc_roc(s, l);
    std::vector<double> neg;
    for (double v : s) neg.push_back(-v);
    CHECK(auc_roc(neg, l) == doctest::Approx(1.0 - forward).epsilon(1e-15));
  }
  SUBCASE("single-class inputs are rejected") {
    std::vector<double> s{0.2, 0.3};
    std::vector<std::uint8_t> ones{1, 1};
    std::vector<std::uint8_t> zeros{0, 0};
    CHECK_THROWS_WITH_AS(auc_roc(s, ones), doctest::Contains("degenerate"),
                         std::runtime_error);
    CHECK_THROWS_WITH_AS(auc_roc(s, zeros), doctest::Contains("degenerate"),
                         std::runtime_error);
  }
  SUBCASE("malformed inputs are rejected") {
    std::vector<double> s{0.2, 0.3};
    std::vector<std::uint8_t> l{1, 0};
    std::vector<std::uint8_t> bad_label{1, 2};
    std::vector<std::uint8_t> short_l{1};
    std::vector<double> inf_s{0.2, std::numeric_limits<double>::infinity()};
    CHECK_THROWS_AS(auc_roc(s, short_l), std::invalid_argument);
    CHECK_THROWS_AS(auc_roc(s, bad_label), std::invalid_argument);
    CHECK_THROWS_AS(auc_roc(inf_s, l), std::invalid_argument);
    CHECK_THROWS_AS(auc_roc(std::vector<double>{}, std::vector<std::uint8_t>{}),
                    std::invalid_argument);
  }
}

TEST_CASE("precision-recall area on hand-checked fixtures") {
  SUBCASE("perfect separation scores one") {
    std::vector<double> s{0.9, 0.8, 0.2, 0.1};
    std::vector<std::uint8_t> l{1, 1, 0, 0};
    CHECK(auc_pr(s, l) == doctest::Approx(1.0).epsilon(1e-15));
  }
  SUBCASE("constant scores give exactly the prevalence") {
    std::vector<double> s{0.3, 0.3, 0.3, 0.3, 0.3};
    std::vector<std::uint8_t> l{1, 0, 0, 1, 0};
    CHECK(auc_pr(s, l) == 2.0 / 5.0);
  }
  SUBCASE("interleaved fixture") {
    // Worked by hand: recall steps at precision 1, then the interpolated
    // segment through the false positive gives 19/24 in total.
    std::vector<double> s{0.9, 0.8, 0.7, 0.1};
    std::vector<std::uint8_t> l{1, 0, 1, 0};
    CHECK(auc_pr(s, l) == doctest::Approx(19.0 / 24.0).epsilon(1e-15));
  }
  SUBCASE("leading negative caps the single recall step") {
    // One positive found after one false positive: rectangle at precision 1/2.
    std::vector<double> s{0.9, 0.5};
    std::vector<std::uint8_t> l{0, 1};
    CHECK(auc_pr(s, l) == doctest::Approx(0.5).epsilon(1e-15));
  }
  SUBCASE("without a positive there is no curve") {
    std::vector<double> s{0.2, 0.3};
    std::vector<std::uint8_t> l{0, 0};
    CHECK_THROWS_WITH_AS(auc_pr(s, l), doctest::Contains("no positives"),
                         std::runtime_error);
  }
  SUBCASE("strictly monotone transforms leave both areas unchanged") {
    std::mt19937_64 rng(404);
    for (int trial = 0; trial < 25; ++trial) {
      ScoredSet set = random_scored_set(rng, 30);
      std::vector<double> warped;
      for (double v : set.scores) warped.push_back(std::pow(v, 3.0) + 2.0);
      CHECK(auc_roc(warped, set.labels) ==
            doctest::Approx(auc_roc(set.scores, set.labels)).epsilon(1e-12));
      CHECK(auc_pr(warped, set.labels) ==
            doctest::Approx(auc_pr(set.scores, set.labels)).epsilon(1e-12));
    }
  }
}

TEST_CASE("both metrics match their reference implementations on random sets") {
  std::mt19937_64 rng(2026);
  for (int trial = 0; trial < 300; ++trial) {
    ScoredSet set = random_scored_set(rng, 50);
    const double roc = auc_roc(set.scores, set.labels);
    const double roc_ref = oracle::auc_roc_pairs(set.scores, set.labels);
    CHECK(std::fabs(roc - roc_ref) < 1e-12);
    const double pr = auc_pr(set.scores, set.labels);
    const double pr_ref = oracle::auc_pr_thresholds(set.scores, set.labels);
    CHECK(std::fabs(pr - pr_ref) < 1e-12);
    CHECK(pr >= 0.0);
    CHECK(pr <= 1.0 + 1e-12);
  }
}

TEST_CASE("per-category evaluation assembles scores, candidates, and positives") {
  std::map<std::string, double> scores{
      {"a", 0.9}, {"b", 0.8}, {"c", 0.7}, {"d", 0.1}};
  std::set<std::string> candidates{"a", "b", "c", "d"};
  std::set<std::string> positives{"a", "c"};

  SUBCASE("counts and values line up with the span-level metrics") {
    EvalReport r = evaluate_category(scores, candidates, positives);
    CHECK(r.n_candidates == 4);
    CHECK(r.n_positives == 2);
    CHECK(r.auc_roc == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(r.auc_pr == doctest::Approx(19.0 / 24.0).epsilon(1e-15));
  }
  SUBCASE("positives outside the candidate set are ignored") {
    std::set<std::string> extra = positives;
    extra.insert("zz_not_a_candidate");
    EvalReport r = evaluate_category(scores, candidates, extra);
    CHECK(r.n_positives == 2);
    CHECK(r.auc_roc == doctest::Approx(0.75).epsilon(1e-15));
  }
  SUBCASE("a candidate without a score is an error") {
    std::set<std::string> wider = candidates;
    wider.insert("unscored");
    CHECK_THROWS_WITH_AS(evaluate_category(scores, wider, positives),
                         doctest::Contains("unscored"), std::invalid_argument);
  }
  SUBCASE("an empty candidate set is an error") {
    CHECK_THROWS_AS(evaluate_category(scores, {}, positives), std::invalid_argument);
  }
}

TEST_CASE("quantiles follow the linear-interpolation rule") {
  std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  CHECK(stats::sorted_quantile(v, 0.5) == doctest::Approx(2.5).epsilon(1e-15));
  CHECK(stats::sorted_quantile(v, 0.25) == doctest::Approx(1.75).epsilon(1e-15));
  CHECK(stats::sorted_quantile(v, 0.0) == 1.0);
  CHECK(stats::sorted_quantile(v, 1.0) == 4.0);
  CHECK(stats::sorted_quantile(std::vector<double>{7.0}, 0.3) == 7.0);

  SUBCASE("the convenience overload sorts first") {
    CHECK(stats::quantile({4.0, 1.0, 3.0, 2.0}, 0.25) ==
          doctest::Approx(1.75).epsilon(1e-15));
  }
  SUBCASE("empty samples and out-of-range levels are rejected") {
    CHECK_THROWS_AS(stats::sorted_quantile(std::vector<double>{}, 0.5),
                    std::invalid_argument);
    CHECK_THROWS_AS(stats::sorted_quantile(v, -0.1), std::invalid_argument);
    CHECK_THROWS_AS(stats::sorted_quantile(v, 1.1), std::invalid_argument);
  }
}

TEST_CASE("moment statistics") {
  SUBCASE("mean and sample standard deviation") {
    std::vector<double> v{1.0, 2.0, 3.0, 4.0};
    CHECK(stats::mean(v) == doctest::Approx(2.5).epsilon(1e-15));
    CHECK(stats::sample_sd(v) == doctest::Approx(std::sqrt(5.0 / 3.0)).epsilon(1e-14));
    CHECK(stats::sample_sd(std::vector<double>{42.0}) == 0.0);
    CHECK_THROWS_AS(stats::mean(std::vector<double>{}), std::invalid_argument);
  }
  SUBCASE("adjusted skewness on a worked example") {
    // {0,0,0,10}: m2 = 75/4, m3 = 375/4, g1 = 2/sqrt(3), G1 = exactly 2.
    std::vector<double> v{0.0, 0.0, 0.0, 10.0};
    CHECK(stats::adjusted_skewness(v) == doctest::Approx(2.0).epsilon(1e-14));
  }
  SUBCASE("symmetric samples have zero skewness") {
    std::vector<double> v{-1.0, 0.0, 1.0};
    CHECK(stats::adjusted_skewness(v) == doctest::Approx(0.0).epsilon(1e-15));
  }
  SUBCASE("degenerate samples") {
    CHECK(stats::adjusted_skewness(std::vector<double>{5.0, 5.0, 5.0}) == 0.0);
    CHECK_THROWS_AS(stats::adjusted_skewness(std::vector<double>{1.0, 2.0}),
                    std::invalid_argument);
  }
}
