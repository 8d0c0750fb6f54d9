#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "hinscreen/core_network.hpp"
#include "hinscreen/feature_extract.hpp"

namespace hinscreen {

// One-hidden-layer perceptron mapping a binary edge-feature row to a weight
// in (0,1). The output layer is always logistic; the hidden activation is
// configurable (logistic or tanh).
class EdgeWeightModel {
 public:
  static EdgeWeightModel init(std::size_t input_dim, std::size_t hidden_dim,
                              const std::string& hidden_activation, std::uint64_t seed);

  std::size_t input_dim() const { return input_dim_; }
  std::size_t hidden_dim() const { return hidden_dim_; }
  const std::string& hidden_activation() const { return activation_; }

  // Weight for a sparse row of active feature indices.
  double weight_for(std::span<const std::uint32_t> active) const;
  // Weight for a dense input vector (used by partial-dependence probing).
  double weight_for_dense(std::span<const double> x) const;

  // Flat parameter order: W1 row-major (hidden x input), b1, w2, b2.
  std::size_t parameter_count() const;
  std::vector<double> parameters() const;
  void set_parameters(std::span<const double> flat);

  void save(const std::string& path) const;
  static EdgeWeightModel load(const std::string& path);

 private:
  friend struct ModelOps;
  std::size_t input_dim_ = 0;
  std::size_t hidden_dim_ = 0;
  std::string activation_ = "logistic";
  std::vector<double> w1_;  // hidden x input, row-major
  std::vector<double> b1_;  // hidden
  std::vector<double> w2_;  // hidden
  double b2_ = 0.0;
};

// w_e = f_theta(x_e) for every core edge. Throws on dimension mismatch.
std::vector<double> edge_weights(const EdgeWeightModel& model, const FeatureMatrix& features);

struct JacobiOptions {
  double tol = 1e-6;  // infinity-norm step tolerance; 0 runs exactly max_iter sweeps
  int max_iter = 100;
};

struct JacobiResult {
  std::vector<double> y;
  int iterations = 0;
  double residual = 0.0;  // last infinity-norm step
  bool converged = false;
  double y_min = 0.0;  // extremes observed across every iterate
  double y_max = 0.0;
};

// Fixed-point iteration Y <- A^{-1}(W Y + Y0) with A_ii = 1[labeled i] + deg_i
// (degree counts edges, not weights, which is what guarantees convergence
// for weights in [0,1]). Throws "no sources" without a labeled node.
JacobiResult jacobi_propagate(const CoreGraph& core, std::span<const double> weights,
                              std::span<const double> y0, const std::vector<std::uint8_t>& labeled,
                              const JacobiOptions& options = {});

// Dense LU solve of (A - W) Y = Y0; test oracle for graphs <= 2,000 nodes.
std::vector<double> direct_solve_oracle(const CoreGraph& core, std::span<const double> weights,
                                        std::span<const double> y0,
                                        const std::vector<std::uint8_t>& labeled);

// max over nodes of (sum of incident weights) / degree; <= 1 certifies the
// diagonal dominance that makes the iteration contract.
double max_weight_degree_ratio(const CoreGraph& core, std::span<const double> weights);

// Infinity-norm of (A - W) y - y0.
double fixed_point_residual(const CoreGraph& core, std::span<const double> weights,
                            std::span<const double> y0, const std::vector<std::uint8_t>& labeled,
                            std::span<const double> y);

// Mean squared error over non-source nodes against the 0/1 target vector
// (1 at targets); with targets_only, the mean runs over targets alone.
double propagation_loss(std::span<const double> y, const std::vector<std::uint8_t>& is_source,
                        const std::vector<std::uint8_t>& is_target, bool targets_only = false);

struct TrainConfig {
  double learning_rate = 0.1;
  int epochs = 200;
  double tol = 1e-6;
  int max_iter = 100;
  std::uint64_t seed = 7;
  std::size_t hidden_dim = 30;
  std::string hidden_activation = "logistic";
  bool loss_targets_only = false;

  void validate() const;  // throws std::invalid_argument
};

// key=value lines; '#' comments. Unknown keys are an error.
TrainConfig parse_train_config(const std::string& path);

struct TrainResult {
  EdgeWeightModel model;
  // loss_trace[0] is the initial loss, one entry per epoch after its
  // update, so size = epochs + 1.
  std::vector<double> loss_trace;
  std::size_t resolved_sources = 0;
  std::size_t resolved_targets = 0;
};

// Full-batch gradient descent on loss(jacobi(edge_weights(theta))), with the
// gradient backpropagated through the Jacobi sweeps actually executed.
// Source/target keys missing from the core are skipped. Deterministic given
// config.seed. Throws on empty resolved sources, source/target overlap, or
// non-finite loss.
TrainResult train(const FeatureMatrix& features, const CoreGraph& core,
                  const std::set<std::string>& sources, const std::set<std::string>& targets,
                  const TrainConfig& config);

// Forward loss and its analytic parameter gradient for one configuration;
// shared by the training loop and the finite-difference correctness check.
double training_loss(const EdgeWeightModel& model, const FeatureMatrix& features,
                     const CoreGraph& core, const std::set<std::string>& sources,
                     const std::set<std::string>& targets, const TrainConfig& config);
std::vector<double> training_gradient(const EdgeWeightModel& model, const FeatureMatrix& features,
                                      const CoreGraph& core, const std::set<std::string>& sources,
                                      const std::set<std::string>& targets,
                                      const TrainConfig& config, double* loss_out = nullptr);

// Node keys resolved against the core; missing keys are counted, not errors
// (label lists legitimately mention firms outside the connected core).
std::vector<NodeIndex> resolve_nodes(const CoreGraph& core, const std::set<std::string>& keys,
                                     std::size_t* missing = nullptr);

// Propagation with every known-label node pinned to 1 in Y0; scores for all
// nodes are returned, callers slice out their candidate set.
JacobiResult predict(const CoreGraph& core, std::span<const double> weights,
                     const std::vector<NodeIndex>& known, const JacobiOptions& options = {});

// Fraction of weights in [0, 0.1] or [0.9, 1]: the saturation measure used
// to summarize learned-weight histograms.
double weight_saturation(std::span<const double> weights);

// Equal-width histogram over [0,1]; the last bin includes 1.0.
std::vector<std::size_t> weight_histogram(std::span<const double> weights, std::size_t bins);

}  // namespace hinscreen
