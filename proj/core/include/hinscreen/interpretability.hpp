#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "hinscreen/feature_extract.hpp"
#include "hinscreen/propagation.hpp"

namespace hinscreen {

// Nonnegative factorization of the binary edge-feature matrix X (rows x
// cols) as coefficients (rows x rank) times basis^T (basis is cols x rank).
struct FactorModel {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t rank = 0;
  std::vector<double> basis;         // cols x rank, row-major
  std::vector<double> coefficients;  // rows x rank, row-major
  std::vector<double> objective_trace;  // objective before iteration 1, then after each

  double basis_at(std::size_t feature, std::size_t k) const { return basis[feature * rank + k]; }
  double coeff_at(std::size_t row, std::size_t k) const { return coefficients[row * rank + k]; }
};

enum class BnmfVariant {
  Logistic,  // X modeled through sigmoid(sharpness * (C B^T - 0.5)), cross-entropy objective
  Linear,    // plain least-squares NMF with multiplicative updates
};

struct BnmfOptions {
  std::size_t rank = 50;
  int iters = 200;
  std::uint64_t seed = 1;
  double sharpness = 8.0;  // logistic-link steepness
  BnmfVariant variant = BnmfVariant::Logistic;
  int threads = 1;
};

// Projected gradient descent with a step-halving line search (logistic
// variant) or multiplicative updates (linear variant). The recorded
// objective trace is non-increasing; factors stay nonnegative. Deterministic
// given the seed. Throws if rank exceeds min(rows, cols) or iters < 1.
FactorModel bnmf(const FeatureMatrix& features, const BnmfOptions& options);

// Objective of a factor pair under the given variant; exposed so tests can
// compare alternative factors against the fitted ones.
double bnmf_objective(const FeatureMatrix& features, const FactorModel& factors,
                      const BnmfOptions& options);

// Thresholded reconstruction: entry (row, feature) is 1 when the modeled
// probability (logistic) or raw product (linear) exceeds 0.5.
bool reconstruct_cell(const FactorModel& factors, std::size_t row, std::size_t feature,
                      const BnmfOptions& options);

// Signed partial-dependence effect of basis k: per edge, rebuild the feature
// vector with coefficient k moved to the column's 0.99 (resp. 0.01) quantile,
// clamp to [0,1], and average f(x99) - f(x01) over edges. A constant
// coefficient column yields 0 and sets *constant_column.
double basis_importance(const EdgeWeightModel& model, const FactorModel& factors, std::size_t k,
                        bool* constant_column = nullptr);

// All bases in one pass over the edges (the base reconstruction per edge is
// shared). Deterministic for any thread count.
std::vector<double> all_basis_effects(const EdgeWeightModel& model, const FactorModel& factors,
                                      std::vector<std::uint8_t>* constant_flags = nullptr,
                                      int threads = 1);

struct ImportanceRow {
  std::size_t basis = 0;
  double mean_signed = 0.0;
  double mean_abs = 0.0;  // mean of |signed effect| across repetitions
  bool constant_column = false;
};

struct ImportanceTable {
  std::vector<ImportanceRow> rows;  // ranked by mean_abs descending, basis ascending
  int repetitions = 0;
  int succeeded = 0;
  std::vector<std::string> failures;  // one message per failed repetition
};

// Re-trains via trainer(rep) for rep = 0..repetitions-1 and averages the
// per-basis effects over the repetitions that succeed; failures are recorded
// and excluded. Throws when every repetition fails.
ImportanceTable repeated_importance(const FactorModel& factors,
                                    const std::function<EdgeWeightModel(int)>& trainer,
                                    int repetitions, int threads = 1);

struct SegmentPeak {
  std::string segment;
  std::string rel_type;
  double value = 0.0;
};

// Top-n basis entries per path segment, for identifying a basis by content.
// Ties break lexicographically on the relation name. Requires path-segment
// features.
std::vector<SegmentPeak> segment_peaks(const FactorModel& factors, const FeatureMatrix& features,
                                       std::size_t k, std::size_t top_n);

}  // namespace hinscreen
