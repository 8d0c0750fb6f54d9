#include "hinscreen/propagation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <Eigen/Dense>

#include "hinscreen/rng.hpp"
#include "hinscreen/tsv.hpp"

namespace hinscreen {

namespace {

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void check_activation(const std::string& tag) {
  if (tag != "logistic" && tag != "tanh") {
    throw std::invalid_argument("unknown hidden activation: " + tag);
  }
}

double activate(const std::string& tag, double x) {
  return tag == "tanh" ? std::tanh(x) : logistic(x);
}

// Derivative expressed through the activation value.
double activate_prime_from_value(const std::string& tag, double a) {
  return tag == "tanh" ? 1.0 - a * a : a * (1.0 - a);
}

std::vector<double> degree_vector(const CoreGraph& core) {
  std::vector<double> deg(core.node_count(), 0.0);
  for (const CoreEdge& e : core.edges()) {
    deg[e.a] += 1.0;
    deg[e.b] += 1.0;
  }
  return deg;
}

std::vector<double> system_diagonal(const CoreGraph& core,
                                    const std::vector<std::uint8_t>& labeled) {
  std::vector<double> a = degree_vector(core);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += labeled[i] ? 1.0 : 0.0;
  return a;
}

void check_propagation_inputs(const CoreGraph& core, std::span<const double> weights,
                              std::span<const double> y0,
                              const std::vector<std::uint8_t>& labeled) {
  if (weights.size() != core.edge_count()) {
    throw std::invalid_argument("weight vector not aligned with core edges");
  }
  if (y0.size() != core.node_count() || labeled.size() != core.node_count()) {
    throw std::invalid_argument("label vectors not aligned with core nodes");
  }
  for (double w : weights) {
    if (!(w >= 0.0 && w <= 1.0)) throw std::invalid_argument("edge weight outside [0,1]");
  }
  if (std::find(labeled.begin(), labeled.end(), std::uint8_t{1}) == labeled.end()) {
    throw std::runtime_error("no sources");
  }
}

// One sweep y_next = A^{-1} (W y + y0).
void jacobi_sweep(const CoreGraph& core, std::span<const double> weights,
                  const std::vector<double>& a_diag, std::span<const double> y0,
                  const std::vector<double>& y, std::vector<double>& y_next) {
  std::fill(y_next.begin(), y_next.end(), 0.0);
  const auto edges = core.edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const double w = weights[e];
    y_next[edges[e].a] += w * y[edges[e].b];
    y_next[edges[e].b] += w * y[edges[e].a];
  }
  for (std::size_t i = 0; i < y_next.size(); ++i) {
    y_next[i] = (y_next[i] + y0[i]) / a_diag[i];
  }
}

struct ForwardCache {
  std::vector<double> hidden;   // edge-major, hidden_dim per edge
  std::vector<double> weights;  // per edge
};

}  // namespace

struct ModelOps {
  static void backward_edge(const EdgeWeightModel& m, std::span<const std::uint32_t> active,
                            const double* hidden, double weight, double upstream,
                            std::vector<double>& grad) {
    const std::size_t d = m.input_dim_, h = m.hidden_dim_;
    double* g_w1 = grad.data();
    double* g_b1 = grad.data() + h * d;
    double* g_w2 = g_b1 + h;
    double* g_b2 = g_w2 + h;
    const double dz2 = upstream * weight * (1.0 - weight);
    *g_b2 += dz2;
    for (std::size_t k = 0; k < h; ++k) {
      const double a = hidden[k];
      g_w2[k] += dz2 * a;
      const double dh = dz2 * m.w2_[k] * activate_prime_from_value(m.activation_, a);
      g_b1[k] += dh;
      double* g_row = g_w1 + k * d;
      for (std::uint32_t j : active) g_row[j] += dh;
    }
  }

  static ForwardCache forward_edges(const EdgeWeightModel& m, const FeatureMatrix& features) {
    const std::size_t h = m.hidden_dim_;
    ForwardCache cache;
    cache.hidden.resize(features.row_count() * h);
    cache.weights.resize(features.row_count());
    std::vector<double> pre(h);
    for (std::size_t e = 0; e < features.row_count(); ++e) {
      pre.assign(m.b1_.begin(), m.b1_.end());
      for (std::uint32_t j : features.rows[e]) {
        const double* col = m.w1_.data() + j;
        for (std::size_t k = 0; k < h; ++k) pre[k] += col[k * m.input_dim_];
      }
      double z2 = m.b2_;
      double* a_out = cache.hidden.data() + e * h;
      for (std::size_t k = 0; k < h; ++k) {
        const double a = activate(m.activation_, pre[k]);
        a_out[k] = a;
        z2 += m.w2_[k] * a;
      }
      cache.weights[e] = logistic(z2);
    }
    return cache;
  }
};

EdgeWeightModel EdgeWeightModel::init(std::size_t input_dim, std::size_t hidden_dim,
                                      const std::string& hidden_activation, std::uint64_t seed) {
  check_activation(hidden_activation);
  if (hidden_dim == 0) throw std::invalid_argument("hidden_dim must be positive");
  EdgeWeightModel m;
  m.input_dim_ = input_dim;
  m.hidden_dim_ = hidden_dim;
  m.activation_ = hidden_activation;
  m.w1_.resize(hidden_dim * input_dim);
  m.b1_.resize(hidden_dim);
  m.w2_.resize(hidden_dim);

  Rng rng(seed);
  const double s1 = 0.5 / std::sqrt(static_cast<double>(std::max<std::size_t>(1, input_dim)));
  const double s2 = 0.5 / std::sqrt(static_cast<double>(hidden_dim));
  for (double& v : m.w1_) v = uniform_range(rng, -s1, s1);
  for (double& v : m.b1_) v = uniform_range(rng, -s1, s1);
  for (double& v : m.w2_) v = uniform_range(rng, -s2, s2);
  m.b2_ = uniform_range(rng, -s2, s2);
  return m;
}

double EdgeWeightModel::weight_for(std::span<const std::uint32_t> active) const {
  double z2 = b2_;
  for (std::size_t k = 0; k < hidden_dim_; ++k) {
    double pre = b1_[k];
    const double* row = w1_.data() + k * input_dim_;
    for (std::uint32_t j : active) {
      if (j >= input_dim_) throw std::invalid_argument("feature index out of range");
      pre += row[j];
    }
    z2 += w2_[k] * activate(activation_, pre);
  }
  return logistic(z2);
}

double EdgeWeightModel::weight_for_dense(std::span<const double> x) const {
  if (x.size() != input_dim_) throw std::invalid_argument("dense input dimension mismatch");
  double z2 = b2_;
  for (std::size_t k = 0; k < hidden_dim_; ++k) {
    double pre = b1_[k];
    const double* row = w1_.data() + k * input_dim_;
    for (std::size_t j = 0; j < input_dim_; ++j) pre += row[j] * x[j];
    z2 += w2_[k] * activate(activation_, pre);
  }
  return logistic(z2);
}

std::size_t EdgeWeightModel::parameter_count() const {
  return hidden_dim_ * input_dim_ + 2 * hidden_dim_ + 1;
}

std::vector<double> EdgeWeightModel::parameters() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  flat.insert(flat.end(), w1_.begin(), w1_.end());
  flat.insert(flat.end(), b1_.begin(), b1_.end());
  flat.insert(flat.end(), w2_.begin(), w2_.end());
  flat.push_back(b2_);
  return flat;
}

void EdgeWeightModel::set_parameters(std::span<const double> flat) {
  if (flat.size() != parameter_count()) {
    throw std::invalid_argument("parameter vector size mismatch");
  }
  std::size_t pos = 0;
  std::copy_n(flat.begin(), w1_.size(), w1_.begin());
  pos += w1_.size();
  std::copy_n(flat.begin() + pos, b1_.size(), b1_.begin());
  pos += b1_.size();
  std::copy_n(flat.begin() + pos, w2_.size(), w2_.begin());
  pos += w2_.size();
  b2_ = flat[pos];
}

std::vector<double> edge_weights(const EdgeWeightModel& model, const FeatureMatrix& features) {
  if (features.col_count() != model.input_dim()) {
    throw std::invalid_argument("feature dimension does not match model input_dim");
  }
  return ModelOps::forward_edges(model, features).weights;
}

JacobiResult jacobi_propagate(const CoreGraph& core, std::span<const double> weights,
                              std::span<const double> y0,
                              const std::vector<std::uint8_t>& labeled,
                              const JacobiOptions& options) {
  check_propagation_inputs(core, weights, y0, labeled);
  if (options.max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");
  const auto a_diag = system_diagonal(core, labeled);

  JacobiResult result;
  std::vector<double> y(y0.begin(), y0.end());
  std::vector<double> y_next(y.size());
  result.y_min = *std::min_element(y.begin(), y.end());
  result.y_max = *std::max_element(y.begin(), y.end());
  for (int iter = 1; iter <= options.max_iter; ++iter) {
    jacobi_sweep(core, weights, a_diag, y0, y, y_next);
    double residual = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      residual = std::max(residual, std::abs(y_next[i] - y[i]));
      result.y_min = std::min(result.y_min, y_next[i]);
      result.y_max = std::max(result.y_max, y_next[i]);
    }
    y.swap(y_next);
    result.iterations = iter;
    result.residual = residual;
    if (options.tol > 0.0 && residual <= options.tol) {
      result.converged = true;
      break;
    }
  }
  result.y = std::move(y);
  return result;
}

std::vector<double> direct_solve_oracle(const CoreGraph& core, std::span<const double> weights,
                                        std::span<const double> y0,
                                        const std::vector<std::uint8_t>& labeled) {
  check_propagation_inputs(core, weights, y0, labeled);
  const std::size_t n = core.node_count();
  if (n > 2000) throw std::invalid_argument("direct solve limited to 2,000 nodes");
  const auto a_diag = system_diagonal(core, labeled);

  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                            static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = a_diag[i];
  }
  const auto edges = core.edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto a = static_cast<Eigen::Index>(edges[e].a);
    const auto b = static_cast<Eigen::Index>(edges[e].b);
    m(a, b) -= weights[e];
    m(b, a) -= weights[e];
  }
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) rhs(static_cast<Eigen::Index>(i)) = y0[i];

  Eigen::VectorXd y = m.partialPivLu().solve(rhs);
  const double residual = (m * y - rhs).lpNorm<Eigen::Infinity>();
  const double scale = std::max(1.0, rhs.lpNorm<Eigen::Infinity>());
  if (!y.allFinite() || residual > 1e-8 * scale) {
    throw std::runtime_error("singular propagation system");
  }
  return {y.data(), y.data() + n};
}

double max_weight_degree_ratio(const CoreGraph& core, std::span<const double> weights) {
  if (weights.size() != core.edge_count()) {
    throw std::invalid_argument("weight vector not aligned with core edges");
  }
  std::vector<double> sum(core.node_count(), 0.0);
  const auto deg = degree_vector(core);
  const auto edges = core.edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    sum[edges[e].a] += weights[e];
    sum[edges[e].b] += weights[e];
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < sum.size(); ++i) {
    if (deg[i] > 0.0) worst = std::max(worst, sum[i] / deg[i]);
  }
  return worst;
}

double fixed_point_residual(const CoreGraph& core, std::span<const double> weights,
                            std::span<const double> y0,
                            const std::vector<std::uint8_t>& labeled,
                            std::span<const double> y) {
  const auto a_diag = system_diagonal(core, labeled);
  std::vector<double> r(core.node_count());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = a_diag[i] * y[i] - y0[i];
  const auto edges = core.edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    r[edges[e].a] -= weights[e] * y[edges[e].b];
    r[edges[e].b] -= weights[e] * y[edges[e].a];
  }
  double worst = 0.0;
  for (double v : r) worst = std::max(worst, std::abs(v));
  return worst;
}

double propagation_loss(std::span<const double> y, const std::vector<std::uint8_t>& is_source,
                        const std::vector<std::uint8_t>& is_target, bool targets_only) {
  if (y.size() != is_source.size() || y.size() != is_target.size()) {
    throw std::invalid_argument("loss mask sizes do not match scores");
  }
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (is_source[i]) {
      if (is_target[i]) throw std::invalid_argument("targets must not overlap sources");
      continue;
    }
    if (targets_only && !is_target[i]) continue;
    const double t = is_target[i] ? 1.0 : 0.0;
    const double d = y[i] - t;
    sum += d * d;
    ++count;
  }
  if (count == 0) throw std::runtime_error("empty non-source set in loss");
  return sum / static_cast<double>(count);
}

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw std::invalid_argument("learning_rate must be finite and >= 0");
  }
  if (epochs < 0) throw std::invalid_argument("epochs must be >= 0");
  if (!(tol >= 0.0)) throw std::invalid_argument("tol must be >= 0");
  if (max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");
  if (hidden_dim == 0) throw std::invalid_argument("hidden_dim must be positive");
  check_activation(hidden_activation);
}

TrainConfig parse_train_config(const std::string& path) {
  TrainConfig config;
  tsv::for_each_line(path, [&](std::size_t lineno, std::string_view line) {
    if (line.empty() || line[0] == '#') return;
    auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected key=value");
    }
    const std::string key(line.substr(0, eq));
    const std::string value(line.substr(eq + 1));
    auto bad = [&]() {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": bad value for " + key);
    };
    double d;
    long long ll;
    if (key == "learning_rate") {
      if (!tsv::parse_double(value, d)) bad();
      config.learning_rate = d;
    } else if (key == "epochs") {
      if (!tsv::parse_int64(value, ll)) bad();
      config.epochs = static_cast<int>(ll);
    } else if (key == "tol") {
      if (!tsv::parse_double(value, d)) bad();
      config.tol = d;
    } else if (key == "max_iter") {
      if (!tsv::parse_int64(value, ll)) bad();
      config.max_iter = static_cast<int>(ll);
    } else if (key == "seed") {
      if (!tsv::parse_int64(value, ll) || ll < 0) bad();
      config.seed = static_cast<std::uint64_t>(ll);
    } else if (key == "hidden_dim") {
      if (!tsv::parse_int64(value, ll) || ll <= 0) bad();
      config.hidden_dim = static_cast<std::size_t>(ll);
    } else if (key == "activation" || key == "hidden_activation") {
      config.hidden_activation = value;
    } else if (key == "loss_targets_only") {
      if (!tsv::parse_int64(value, ll) || (ll != 0 && ll != 1)) bad();
      config.loss_targets_only = ll == 1;
    } else {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": unknown key " + key);
    }
  });
  config.validate();
  return config;
}

std::vector<NodeIndex> resolve_nodes(const CoreGraph& core, const std::set<std::string>& keys,
                                     std::size_t* missing) {
  std::vector<NodeIndex> out;
  std::size_t miss = 0;
  for (const auto& key : keys) {
    if (auto v = core.find_node(key)) {
      out.push_back(*v);
    } else {
      ++miss;
    }
  }
  if (missing) *missing = miss;
  return out;
}

namespace {

struct TrainingSetup {
  std::vector<std::uint8_t> is_source;
  std::vector<std::uint8_t> is_target;
  std::vector<double> y0;
  std::size_t n_sources = 0;
  std::size_t n_targets = 0;
};

TrainingSetup resolve_training_sets(const CoreGraph& core, const std::set<std::string>& sources,
                                    const std::set<std::string>& targets) {
  TrainingSetup setup;
  const std::size_t n = core.node_count();
  setup.is_source.assign(n, 0);
  setup.is_target.assign(n, 0);
  setup.y0.assign(n, 0.0);
  for (NodeIndex v : resolve_nodes(core, sources, nullptr)) {
    setup.is_source[v] = 1;
    setup.y0[v] = 1.0;
    ++setup.n_sources;
  }
  for (NodeIndex v : resolve_nodes(core, targets, nullptr)) {
    if (setup.is_source[v]) {
      throw std::invalid_argument("targets must not overlap sources: " + core.node_key(v));
    }
    setup.is_target[v] = 1;
    ++setup.n_targets;
  }
  if (setup.n_sources == 0) throw std::runtime_error("no sources");
  return setup;
}

// Forward pass storing every Jacobi iterate, then reverse-mode accumulation
// through the executed sweeps. Gradient layout matches model.parameters().
double gradient_pass(const EdgeWeightModel& model, const FeatureMatrix& features,
                     const CoreGraph& core, const TrainingSetup& setup,
                     const TrainConfig& config, std::vector<double>* grad_out) {
  const std::size_t n = core.node_count();
  const auto a_diag = system_diagonal(core, setup.is_source);
  ForwardCache cache = ModelOps::forward_edges(model, features);
  check_propagation_inputs(core, cache.weights, setup.y0, setup.is_source);

  std::vector<std::vector<double>> iterates;
  iterates.reserve(static_cast<std::size_t>(config.max_iter) + 1);
  iterates.push_back(setup.y0);
  std::vector<double> y_next(n);
  for (int iter = 1; iter <= config.max_iter; ++iter) {
    jacobi_sweep(core, cache.weights, a_diag, setup.y0, iterates.back(), y_next);
    double residual = 0.0;
    const auto& y_prev = iterates.back();
    for (std::size_t i = 0; i < n; ++i) {
      residual = std::max(residual, std::abs(y_next[i] - y_prev[i]));
    }
    iterates.push_back(y_next);
    if (config.tol > 0.0 && residual <= config.tol) break;
  }

  const std::vector<double>& y_final = iterates.back();
  const double loss =
      propagation_loss(y_final, setup.is_source, setup.is_target, config.loss_targets_only);
  if (grad_out == nullptr) return loss;

  // dL/dY at the final iterate.
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (setup.is_source[i]) continue;
    if (config.loss_targets_only && !setup.is_target[i]) continue;
    ++count;
  }
  std::vector<double> g(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (setup.is_source[i]) continue;
    if (config.loss_targets_only && !setup.is_target[i]) continue;
    const double t = setup.is_target[i] ? 1.0 : 0.0;
    g[i] = 2.0 * (y_final[i] - t) / static_cast<double>(count);
  }

  // Accumulate dL/dw per edge while walking the sweeps backwards:
  //   Y^{t+1}_i = (sum_j w_ij Y^t_j + Y0_i) / A_ii
  // contributes Y^t_j / A_ii to dY^{t+1}_i/dw_ij, and the adjoint recursion
  // is G^t_j = sum_i w_ij G^{t+1}_i / A_ii.
  const auto edges = core.edges();
  std::vector<double> gw(edges.size(), 0.0);
  std::vector<double> g_prev(n);
  const std::size_t sweeps = iterates.size() - 1;
  for (std::size_t step = sweeps; step >= 1; --step) {
    const std::vector<double>& y_prev = iterates[step - 1];
    std::fill(g_prev.begin(), g_prev.end(), 0.0);
    for (std::size_t e = 0; e < edges.size(); ++e) {
      const NodeIndex a = edges[e].a, b = edges[e].b;
      const double ga_scaled = g[a] / a_diag[a];
      const double gb_scaled = g[b] / a_diag[b];
      gw[e] += ga_scaled * y_prev[b] + gb_scaled * y_prev[a];
      g_prev[a] += cache.weights[e] * gb_scaled;
      g_prev[b] += cache.weights[e] * ga_scaled;
    }
    g.swap(g_prev);
  }

  grad_out->assign(model.parameter_count(), 0.0);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (gw[e] == 0.0) continue;
    ModelOps::backward_edge(model, features.rows[e],
                            cache.hidden.data() + e * model.hidden_dim(), cache.weights[e],
                            gw[e], *grad_out);
  }
  return loss;
}

}  // namespace

double training_loss(const EdgeWeightModel& model, const FeatureMatrix& features,
                     const CoreGraph& core, const std::set<std::string>& sources,
                     const std::set<std::string>& targets, const TrainConfig& config) {
  config.validate();
  auto setup = resolve_training_sets(core, sources, targets);
  return gradient_pass(model, features, core, setup, config, nullptr);
}

std::vector<double> training_gradient(const EdgeWeightModel& model, const FeatureMatrix& features,
                                      const CoreGraph& core, const std::set<std::string>& sources,
                                      const std::set<std::string>& targets,
                                      const TrainConfig& config, double* loss_out) {
  config.validate();
  auto setup = resolve_training_sets(core, sources, targets);
  std::vector<double> grad;
  const double loss = gradient_pass(model, features, core, setup, config, &grad);
  if (loss_out) *loss_out = loss;
  return grad;
}

TrainResult train(const FeatureMatrix& features, const CoreGraph& core,
                  const std::set<std::string>& sources, const std::set<std::string>& targets,
                  const TrainConfig& config) {
  config.validate();
  if (features.row_count() != core.edge_count()) {
    throw std::invalid_argument("feature rows not aligned with core edges");
  }
  auto setup = resolve_training_sets(core, sources, targets);

  TrainResult result{
      EdgeWeightModel::init(features.col_count(), config.hidden_dim, config.hidden_activation,
                            config.seed),
      {},
      setup.n_sources,
      setup.n_targets};

  std::vector<double> params = result.model.parameters();
  std::vector<double> grad;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const double loss = gradient_pass(result.model, features, core, setup, config, &grad);
    result.loss_trace.push_back(loss);
    if (!std::isfinite(loss)) {
      throw std::runtime_error("training diverged (non-finite loss) at epoch " +
                               std::to_string(epoch));
    }
    for (std::size_t p = 0; p < params.size(); ++p) {
      params[p] -= config.learning_rate * grad[p];
    }
    result.model.set_parameters(params);
  }
  result.loss_trace.push_back(
      gradient_pass(result.model, features, core, setup, config, nullptr));
  return result;
}

JacobiResult predict(const CoreGraph& core, std::span<const double> weights,
                     const std::vector<NodeIndex>& known, const JacobiOptions& options) {
  std::vector<double> y0(core.node_count(), 0.0);
  std::vector<std::uint8_t> labeled(core.node_count(), 0);
  for (NodeIndex v : known) {
    if (v >= core.node_count()) throw std::invalid_argument("known node out of range");
    y0[v] = 1.0;
    labeled[v] = 1;
  }
  return jacobi_propagate(core, weights, y0, labeled, options);
}

double weight_saturation(std::span<const double> weights) {
  if (weights.empty()) return 0.0;
  std::size_t hits = 0;
  for (double w : weights) {
    if (w <= 0.1 || w >= 0.9) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(weights.size());
}

std::vector<std::size_t> weight_histogram(std::span<const double> weights, std::size_t bins) {
  if (bins == 0) throw std::invalid_argument("histogram needs at least one bin");
  std::vector<std::size_t> counts(bins, 0);
  for (double w : weights) {
    double clamped = std::min(1.0, std::max(0.0, w));
    auto bin = static_cast<std::size_t>(clamped * static_cast<double>(bins));
    if (bin == bins) bin = bins - 1;
    ++counts[bin];
  }
  return counts;
}

void EdgeWeightModel::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << "#hinscreen-model\tv1\n";
  out << "#dims\t" << input_dim_ << '\t' << hidden_dim_ << '\n';
  out << "#activation\t" << activation_ << '\n';
  out << "b2\t" << tsv::format_double(b2_) << '\n';
  auto write_vector = [&](const char* tag, const std::vector<double>& v) {
    out << tag;
    for (double x : v) out << '\t' << tsv::format_double(x);
    out << '\n';
  };
  write_vector("w2", w2_);
  write_vector("b1", b1_);
  for (std::size_t k = 0; k < hidden_dim_; ++k) {
    out << "W1\t" << k;
    for (std::size_t j = 0; j < input_dim_; ++j) {
      out << '\t' << tsv::format_double(w1_[k * input_dim_ + j]);
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

EdgeWeightModel EdgeWeightModel::load(const std::string& path) {
  EdgeWeightModel m;
  bool header_seen = false, dims_seen = false;
  auto fail = [&](std::size_t lineno, const std::string& msg) {
    throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + msg);
  };
  auto parse_values = [&](std::size_t lineno, const std::vector<std::string_view>& fields,
                          std::size_t from, std::vector<double>& dest, std::size_t expected) {
    if (fields.size() - from != expected) fail(lineno, "wrong value count");
    dest.resize(expected);
    for (std::size_t i = 0; i < expected; ++i) {
      if (!tsv::parse_double(fields[from + i], dest[i])) fail(lineno, "bad number");
    }
  };
  tsv::for_each_line(path, [&](std::size_t lineno, std::string_view line) {
    if (line.empty()) return;
    auto fields = tsv::split(line);
    if (!header_seen) {
      if (fields.size() < 2 || fields[0] != "#hinscreen-model" || fields[1] != "v1") {
        fail(lineno, "not a v1 model file");
      }
      header_seen = true;
      return;
    }
    if (fields[0] == "#dims" && fields.size() == 3) {
      long long d, h;
      if (!tsv::parse_int64(fields[1], d) || !tsv::parse_int64(fields[2], h) || d < 0 || h <= 0) {
        fail(lineno, "bad dims");
      }
      m.input_dim_ = static_cast<std::size_t>(d);
      m.hidden_dim_ = static_cast<std::size_t>(h);
      m.w1_.assign(m.input_dim_ * m.hidden_dim_, 0.0);
      m.b1_.assign(m.hidden_dim_, 0.0);
      m.w2_.assign(m.hidden_dim_, 0.0);
      dims_seen = true;
      return;
    }
    if (fields[0] == "#activation" && fields.size() == 2) {
      m.activation_ = std::string(fields[1]);
      check_activation(m.activation_);
      return;
    }
    if (!dims_seen) fail(lineno, "parameters before #dims");
    if (fields[0] == "b2") {
      if (fields.size() != 2 || !tsv::parse_double(fields[1], m.b2_)) fail(lineno, "bad b2");
    } else if (fields[0] == "w2") {
      parse_values(lineno, fields, 1, m.w2_, m.hidden_dim_);
    } else if (fields[0] == "b1") {
      parse_values(lineno, fields, 1, m.b1_, m.hidden_dim_);
    } else if (fields[0] == "W1") {
      if (fields.size() < 2) fail(lineno, "bad W1 line");
      long long row;
      if (!tsv::parse_int64(fields[1], row) || row < 0 ||
          static_cast<std::size_t>(row) >= m.hidden_dim_) {
        fail(lineno, "bad W1 row index");
      }
      std::vector<double> values;
      parse_values(lineno, fields, 2, values, m.input_dim_);
      std::copy(values.begin(), values.end(),
                m.w1_.begin() + static_cast<std::size_t>(row) * m.input_dim_);
    } else if (!fields[0].empty() && fields[0][0] == '#') {
      // ignore annotations
    } else {
      fail(lineno, "unknown record tag");
    }
  });
  if (!header_seen || !dims_seen) throw std::runtime_error(path + ": incomplete model file");
  return m;
}

}  // namespace hinscreen
