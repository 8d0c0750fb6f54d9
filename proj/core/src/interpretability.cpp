#include "hinscreen/interpretability.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include <Eigen/Core>

#include "hinscreen/parallel.hpp"
#include "hinscreen/rng.hpp"
#include "hinscreen/stats.hpp"

namespace hinscreen {

namespace {

using RMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

double softplus(double t) {
  return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

constexpr Eigen::Index kBlockRows = 128;

// Cross-entropy of X against sigmoid(s (C B^T - 0.5)), averaged over cells.
// bce(x=0) = softplus(z), bce(x=1) = softplus(z) - z, so one dense pass plus
// a sparse correction covers the whole matrix.
double logistic_objective(const FeatureMatrix& x, const RMatrix& c, const RMatrix& b, double s) {
  const Eigen::Index rows = c.rows(), cols = b.rows();
  double total = 0.0;
  RMatrix r;
  for (Eigen::Index r0 = 0; r0 < rows; r0 += kBlockRows) {
    const Eigen::Index len = std::min(kBlockRows, rows - r0);
    r.noalias() = c.middleRows(r0, len) * b.transpose();
    for (Eigen::Index i = 0; i < len; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) {
        total += softplus(s * (r(i, j) - 0.5));
      }
      for (std::uint32_t j : x.rows[static_cast<std::size_t>(r0 + i)]) {
        total -= s * (r(i, static_cast<Eigen::Index>(j)) - 0.5);
      }
    }
  }
  return total / (static_cast<double>(rows) * static_cast<double>(cols));
}

void logistic_gradient(const FeatureMatrix& x, const RMatrix& c, const RMatrix& b, double s,
                       RMatrix& gc, RMatrix& gb) {
  const Eigen::Index rows = c.rows(), cols = b.rows();
  const double scale = s / (static_cast<double>(rows) * static_cast<double>(cols));
  gc.resize(rows, c.cols());
  gb.setZero(b.rows(), b.cols());
  RMatrix d;
  for (Eigen::Index r0 = 0; r0 < rows; r0 += kBlockRows) {
    const Eigen::Index len = std::min(kBlockRows, rows - r0);
    d.noalias() = c.middleRows(r0, len) * b.transpose();
    for (Eigen::Index i = 0; i < len; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) {
        const double z = s * (d(i, j) - 0.5);
        d(i, j) = scale / (1.0 + std::exp(-z));
      }
      for (std::uint32_t j : x.rows[static_cast<std::size_t>(r0 + i)]) {
        d(i, static_cast<Eigen::Index>(j)) -= scale;
      }
    }
    gc.middleRows(r0, len).noalias() = d * b;
    gb.noalias() += d.transpose() * c.middleRows(r0, len);
  }
}

double linear_objective(const FeatureMatrix& x, const RMatrix& c, const RMatrix& b) {
  const Eigen::Index rows = c.rows(), cols = b.rows();
  double total = 0.0;
  RMatrix r;
  for (Eigen::Index r0 = 0; r0 < rows; r0 += kBlockRows) {
    const Eigen::Index len = std::min(kBlockRows, rows - r0);
    r.noalias() = c.middleRows(r0, len) * b.transpose();
    total += r.squaredNorm();
    for (Eigen::Index i = 0; i < len; ++i) {
      const auto& active = x.rows[static_cast<std::size_t>(r0 + i)];
      for (std::uint32_t j : active) total -= 2.0 * r(i, static_cast<Eigen::Index>(j));
      total += static_cast<double>(active.size());
    }
  }
  return total / (static_cast<double>(rows) * static_cast<double>(cols));
}

void check_factor_shapes(const FactorModel& factors) {
  if (factors.rank == 0 || factors.basis.size() != factors.cols * factors.rank ||
      factors.coefficients.size() != factors.rows * factors.rank) {
    throw std::invalid_argument("malformed factor model");
  }
}

struct ColumnStats {
  double q01 = 0.0;
  double q99 = 0.0;
  bool constant = false;
};

ColumnStats column_stats(const FactorModel& factors, std::size_t k) {
  std::vector<double> col(factors.rows);
  for (std::size_t e = 0; e < factors.rows; ++e) col[e] = factors.coeff_at(e, k);
  std::sort(col.begin(), col.end());
  ColumnStats cs;
  cs.q01 = stats::sorted_quantile(col, 0.01);
  cs.q99 = stats::sorted_quantile(col, 0.99);
  cs.constant = col.front() == col.back();
  return cs;
}

// Per-edge signed effects for the requested bases, rows x ks.size(), filled
// in parallel and reduced in edge order by the callers (deterministic under
// any thread count).
std::vector<double> per_edge_effects(const EdgeWeightModel& model, const FactorModel& factors,
                                     std::span<const std::size_t> ks,
                                     std::span<const ColumnStats> cs, int threads) {
  const std::size_t cols = factors.cols, rank = factors.rank;
  std::vector<double> effects(factors.rows * ks.size(), 0.0);
  parallel_for(factors.rows, threads, [&](std::size_t e) {
    std::vector<double> base(cols, 0.0);
    for (std::size_t j = 0; j < cols; ++j) {
      double r = 0.0;
      const double* brow = factors.basis.data() + j * rank;
      const double* crow = factors.coefficients.data() + e * rank;
      for (std::size_t k = 0; k < rank; ++k) r += crow[k] * brow[k];
      base[j] = r;
    }
    std::vector<double> hi(cols), lo(cols);
    for (std::size_t idx = 0; idx < ks.size(); ++idx) {
      if (cs[idx].q01 == cs[idx].q99) continue;
      const std::size_t k = ks[idx];
      const double c_ek = factors.coeff_at(e, k);
      const double d_hi = cs[idx].q99 - c_ek;
      const double d_lo = cs[idx].q01 - c_ek;
      for (std::size_t j = 0; j < cols; ++j) {
        const double bjk = factors.basis[j * rank + k];
        hi[j] = std::clamp(base[j] + d_hi * bjk, 0.0, 1.0);
        lo[j] = std::clamp(base[j] + d_lo * bjk, 0.0, 1.0);
      }
      effects[e * ks.size() + idx] = model.weight_for_dense(hi) - model.weight_for_dense(lo);
    }
  });
  return effects;
}

void check_model_alignment(const EdgeWeightModel& model, const FactorModel& factors) {
  check_factor_shapes(factors);
  if (model.input_dim() != factors.cols) {
    throw std::invalid_argument("model input dimension does not match factor columns");
  }
  if (factors.rows == 0) throw std::invalid_argument("factor model has no rows");
}

}  // namespace

FactorModel bnmf(const FeatureMatrix& features, const BnmfOptions& options) {
  const std::size_t rows = features.row_count();
  const std::size_t cols = features.col_count();
  if (options.rank < 1 || options.rank > std::min(rows, cols)) {
    throw std::invalid_argument("rank too large");
  }
  if (options.iters < 1) throw std::invalid_argument("iters must be >= 1");
  if (!(options.sharpness > 0.0)) throw std::invalid_argument("sharpness must be positive");

  const auto rank = static_cast<Eigen::Index>(options.rank);
  RMatrix c(static_cast<Eigen::Index>(rows), rank);
  RMatrix b(static_cast<Eigen::Index>(cols), rank);
  Rng rng(options.seed);
  const double amp = std::sqrt(2.0 / static_cast<double>(options.rank));
  for (Eigen::Index i = 0; i < c.rows(); ++i) {
    for (Eigen::Index k = 0; k < rank; ++k) c(i, k) = uniform_range(rng, 0.0, amp);
  }
  for (Eigen::Index j = 0; j < b.rows(); ++j) {
    for (Eigen::Index k = 0; k < rank; ++k) b(j, k) = uniform_range(rng, 0.0, amp);
  }

  std::vector<double> trace;
  if (options.variant == BnmfVariant::Logistic) {
    double obj = logistic_objective(features, c, b, options.sharpness);
    trace.push_back(obj);
    RMatrix gc, gb, c2, b2;
    double step = 1.0;
    for (int it = 0; it < options.iters; ++it) {
      logistic_gradient(features, c, b, options.sharpness, gc, gb);
      bool accepted = false;
      for (int trial = 0; trial < 40 && step > 1e-18; ++trial) {
        c2 = (c - step * gc).cwiseMax(0.0);
        b2 = (b - step * gb).cwiseMax(0.0);
        const double obj2 = logistic_objective(features, c2, b2, options.sharpness);
        if (obj2 <= obj) {
          c.swap(c2);
          b.swap(b2);
          obj = obj2;
          step = std::min(step * 1.25, 1e6);
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      trace.push_back(obj);
      if (!accepted) break;  // no step length decreases the objective
    }
  } else {
    constexpr double kEps = 1e-12;
    trace.push_back(linear_objective(features, c, b));
    RMatrix xb(c.rows(), rank), xtc(b.rows(), rank);
    for (int it = 0; it < options.iters; ++it) {
      // C <- C .* (X B) ./ (C B^T B)
      xb.setZero();
      for (std::size_t e = 0; e < rows; ++e) {
        for (std::uint32_t j : features.rows[e]) {
          xb.row(static_cast<Eigen::Index>(e)) += b.row(static_cast<Eigen::Index>(j));
        }
      }
      RMatrix denom_c = c * (b.transpose() * b);
      c = c.cwiseProduct(xb).cwiseQuotient(denom_c.array().max(kEps).matrix());
      // B <- B .* (X^T C) ./ (B C^T C)
      xtc.setZero();
      for (std::size_t e = 0; e < rows; ++e) {
        for (std::uint32_t j : features.rows[e]) {
          xtc.row(static_cast<Eigen::Index>(j)) += c.row(static_cast<Eigen::Index>(e));
        }
      }
      RMatrix denom_b = b * (c.transpose() * c);
      b = b.cwiseProduct(xtc).cwiseQuotient(denom_b.array().max(kEps).matrix());
      trace.push_back(linear_objective(features, c, b));
    }
  }

  FactorModel out;
  out.rows = rows;
  out.cols = cols;
  out.rank = options.rank;
  out.coefficients.assign(c.data(), c.data() + c.size());
  out.basis.assign(b.data(), b.data() + b.size());
  out.objective_trace = std::move(trace);
  return out;
}

double bnmf_objective(const FeatureMatrix& features, const FactorModel& factors,
                      const BnmfOptions& options) {
  check_factor_shapes(factors);
  if (factors.rows != features.row_count() || factors.cols != features.col_count()) {
    throw std::invalid_argument("factor model does not match feature matrix");
  }
  Eigen::Map<const RMatrix> c(factors.coefficients.data(),
                              static_cast<Eigen::Index>(factors.rows),
                              static_cast<Eigen::Index>(factors.rank));
  Eigen::Map<const RMatrix> b(factors.basis.data(), static_cast<Eigen::Index>(factors.cols),
                              static_cast<Eigen::Index>(factors.rank));
  const RMatrix cm = c, bm = b;
  return options.variant == BnmfVariant::Logistic
             ? logistic_objective(features, cm, bm, options.sharpness)
             : linear_objective(features, cm, bm);
}

bool reconstruct_cell(const FactorModel& factors, std::size_t row, std::size_t feature,
                      const BnmfOptions& options) {
  check_factor_shapes(factors);
  if (row >= factors.rows || feature >= factors.cols) {
    throw std::out_of_range("factor cell out of range");
  }
  double r = 0.0;
  for (std::size_t k = 0; k < factors.rank; ++k) {
    r += factors.coeff_at(row, k) * factors.basis_at(feature, k);
  }
  // sigmoid(s (r - 0.5)) > 0.5 iff r > 0.5, same rule either way
  (void)options;
  return r > 0.5;
}

double basis_importance(const EdgeWeightModel& model, const FactorModel& factors, std::size_t k,
                        bool* constant_column) {
  check_model_alignment(model, factors);
  if (k >= factors.rank) throw std::out_of_range("basis index out of range");
  const ColumnStats cs = column_stats(factors, k);
  if (constant_column) *constant_column = cs.constant;
  if (cs.q01 == cs.q99) return 0.0;
  const std::size_t ks[] = {k};
  const ColumnStats css[] = {cs};
  const auto effects = per_edge_effects(model, factors, ks, css, 1);
  double sum = 0.0;
  for (double v : effects) sum += v;
  return sum / static_cast<double>(factors.rows);
}

std::vector<double> all_basis_effects(const EdgeWeightModel& model, const FactorModel& factors,
                                      std::vector<std::uint8_t>* constant_flags, int threads) {
  check_model_alignment(model, factors);
  std::vector<std::size_t> ks(factors.rank);
  std::vector<ColumnStats> cs(factors.rank);
  for (std::size_t k = 0; k < factors.rank; ++k) {
    ks[k] = k;
    cs[k] = column_stats(factors, k);
  }
  if (constant_flags) {
    constant_flags->resize(factors.rank);
    for (std::size_t k = 0; k < factors.rank; ++k) (*constant_flags)[k] = cs[k].constant ? 1 : 0;
  }
  const auto effects = per_edge_effects(model, factors, ks, cs, threads);
  std::vector<double> means(factors.rank, 0.0);
  for (std::size_t e = 0; e < factors.rows; ++e) {
    for (std::size_t k = 0; k < factors.rank; ++k) means[k] += effects[e * factors.rank + k];
  }
  for (double& m : means) m /= static_cast<double>(factors.rows);
  return means;
}

ImportanceTable repeated_importance(const FactorModel& factors,
                                    const std::function<EdgeWeightModel(int)>& trainer,
                                    int repetitions, int threads) {
  check_factor_shapes(factors);
  if (repetitions < 1) throw std::invalid_argument("repetitions must be >= 1");
  ImportanceTable table;
  table.repetitions = repetitions;
  std::vector<double> sum_signed(factors.rank, 0.0), sum_abs(factors.rank, 0.0);
  for (int rep = 0; rep < repetitions; ++rep) {
    try {
      const EdgeWeightModel model = trainer(rep);
      const auto effects = all_basis_effects(model, factors, nullptr, threads);
      for (std::size_t k = 0; k < factors.rank; ++k) {
        sum_signed[k] += effects[k];
        sum_abs[k] += std::abs(effects[k]);
      }
      ++table.succeeded;
    } catch (const std::exception& ex) {
      table.failures.push_back("repetition " + std::to_string(rep) + ": " + ex.what());
    }
  }
  if (table.succeeded == 0) throw std::runtime_error("all repetitions failed");

  table.rows.reserve(factors.rank);
  for (std::size_t k = 0; k < factors.rank; ++k) {
    ImportanceRow row;
    row.basis = k;
    row.mean_signed = sum_signed[k] / table.succeeded;
    row.mean_abs = sum_abs[k] / table.succeeded;
    row.constant_column = column_stats(factors, k).constant;
    table.rows.push_back(row);
  }
  std::sort(table.rows.begin(), table.rows.end(), [](const auto& a, const auto& b) {
    if (a.mean_abs != b.mean_abs) return a.mean_abs > b.mean_abs;
    return a.basis < b.basis;
  });
  return table;
}

std::vector<SegmentPeak> segment_peaks(const FactorModel& factors, const FeatureMatrix& features,
                                       std::size_t k, std::size_t top_n) {
  check_factor_shapes(factors);
  if (features.scheme != FeatureScheme::PathSegment) {
    throw std::invalid_argument("segment peaks require path-segment features");
  }
  if (factors.cols != features.catalog.size()) {
    throw std::invalid_argument("factor model does not match feature catalog");
  }
  if (k >= factors.rank) throw std::out_of_range("basis index out of range");
  if (top_n == 0) throw std::invalid_argument("top_n must be >= 1");

  static const std::vector<std::string> kSegments{"1", "2", "3:1", "3:2", "4:1", "4:2"};
  std::map<std::string, std::vector<std::pair<double, std::string>>> buckets;
  for (std::size_t j = 0; j < features.catalog.size(); ++j) {
    const std::string& name = features.catalog[j];
    const auto at = name.rfind('@');
    if (at == std::string::npos) {
      throw std::invalid_argument("feature name lacks a segment tag: " + name);
    }
    const std::string seg = name.substr(at + 1);
    if (std::find(kSegments.begin(), kSegments.end(), seg) == kSegments.end()) {
      throw std::invalid_argument("unknown segment tag in feature name: " + name);
    }
    buckets[seg].emplace_back(factors.basis_at(j, k), name.substr(0, at));
  }

  std::vector<SegmentPeak> out;
  for (const auto& seg : kSegments) {
    auto it = buckets.find(seg);
    if (it == buckets.end()) continue;
    auto& entries = it->second;
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    });
    const std::size_t take = std::min(top_n, entries.size());
    for (std::size_t i = 0; i < take; ++i) {
      out.push_back({seg, entries[i].second, entries[i].first});
    }
  }
  return out;
}

}  // namespace hinscreen
