#include <algorithm>
#include <fstream>
#include <iostream>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "commands.hpp"
#include "manifest.hpp"

#include "hinscreen/core_network.hpp"
#include "hinscreen/evaluation.hpp"
#include "hinscreen/feature_extract.hpp"
#include "hinscreen/label_store.hpp"
#include "hinscreen/propagation.hpp"
#include "hinscreen/tsv.hpp"
#include "hinscreen/version.hpp"

namespace hinscreen::cli {

namespace {

RunManifest base_manifest() {
  RunManifest m;
  m.argv = invocation();
  m.version = kVersion;
  return m;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  return out;
}

struct TrainArgs {
  std::string features;
  std::string core;
  std::string splits;
  std::string config;
  std::string out;
};

void run_train(const TrainArgs& args) {
  ManifestTimer timer;
  const FeatureMatrix features = FeatureMatrix::load(args.features);
  const CoreGraph core = CoreGraph::load(args.core);
  features.require_match(core);
  const CategorySplit split = load_split(args.splits);
  const TrainConfig config =
      args.config.empty() ? TrainConfig{} : parse_train_config(args.config);

  const TrainResult result = train(features, core, split.sources, split.targets, config);
  result.model.save(args.out);

  std::cout << "category\t" << split.category << '\n'
            << "resolved_sources\t" << result.resolved_sources << '\n'
            << "resolved_targets\t" << result.resolved_targets << '\n'
            << "epochs\t" << config.epochs << '\n'
            << "initial_loss\t" << tsv::format_double(result.loss_trace.front()) << '\n'
            << "final_loss\t" << tsv::format_double(result.loss_trace.back()) << '\n';

  RunManifest m = base_manifest();
  m.add_input(args.features);
  m.add_input(args.core);
  m.add_input(args.splits);
  if (!args.config.empty()) m.add_input(args.config);
  m.config["learning_rate"] = tsv::format_double(config.learning_rate);
  m.config["epochs"] = std::to_string(config.epochs);
  m.config["tol"] = tsv::format_double(config.tol);
  m.config["max_iter"] = std::to_string(config.max_iter);
  m.config["hidden_dim"] = std::to_string(config.hidden_dim);
  m.config["activation"] = config.hidden_activation;
  m.config["loss_targets_only"] = config.loss_targets_only ? "1" : "0";
  m.seeds = {config.seed};
  timer.finish(m, args.out);
}

struct PredictArgs {
  std::string model;
  std::string features;
  std::string core;
  std::string splits;
  std::string out;
  double tol = 1e-6;
  int max_iter = 100;
};

void run_predict(const PredictArgs& args) {
  ManifestTimer timer;
  const EdgeWeightModel model = EdgeWeightModel::load(args.model);
  const FeatureMatrix features = FeatureMatrix::load(args.features);
  const CoreGraph core = CoreGraph::load(args.core);
  features.require_match(core);
  const CategorySplit split = load_split(args.splits);

  const std::vector<double> weights = edge_weights(model, features);
  std::set<std::string> known_keys = split.sources;
  known_keys.insert(split.targets.begin(), split.targets.end());
  std::size_t missing = 0;
  const auto known = resolve_nodes(core, known_keys, &missing);
  if (missing > 0) {
    std::cerr << "warning: " << missing << " labeled firm(s) outside the core\n";
  }
  JacobiOptions options;
  options.tol = args.tol;
  options.max_iter = args.max_iter;
  const JacobiResult solved = predict(core, weights, known, options);

  struct Row {
    std::string firm;
    double score;
  };
  std::vector<Row> rows;
  rows.reserve(split.candidates.size());
  std::size_t outside = 0;
  for (const auto& [firm, label] : split.candidates) {
    (void)label;
    const auto node = core.find_node(firm);
    if (!node) ++outside;
    rows.push_back({firm, node ? solved.y[*node] : 0.0});
  }
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.firm < b.firm;
  });

  auto out = open_out(args.out);
  out << "firm_key\tscore\trank\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out << rows[i].firm << '\t' << tsv::format_double(rows[i].score) << '\t' << i + 1 << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + args.out);

  std::cout << "candidates\t" << rows.size() << '\n'
            << "outside_core\t" << outside << '\n'
            << "iterations\t" << solved.iterations << '\n'
            << "converged\t" << (solved.converged ? 1 : 0) << '\n'
            << "residual\t" << tsv::format_double(solved.residual) << '\n';

  RunManifest m = base_manifest();
  m.add_input(args.model);
  m.add_input(args.features);
  m.add_input(args.core);
  m.add_input(args.splits);
  m.config["tol"] = tsv::format_double(args.tol);
  m.config["max_iter"] = std::to_string(args.max_iter);
  timer.finish(m, args.out);
}

struct EvaluateArgs {
  std::string scores;
  std::string positives;
  std::string out;
  std::string category = "-";
  std::string method = "-";
};

void run_evaluate(const EvaluateArgs& args) {
  ManifestTimer timer;
  std::map<std::string, double> scores;
  tsv::for_each_line(args.scores, [&](std::size_t lineno, std::string_view line) {
    if (line.empty() || line[0] == '#') return;
    const auto fields = tsv::split(line);
    if (lineno == 1 && !fields.empty() && fields[0] == "firm_key") return;  // header
    if (fields.size() < 2) {
      throw std::runtime_error(args.scores + ":" + std::to_string(lineno) +
                               ": expected firm_key and score");
    }
    double score;
    if (!tsv::parse_double(fields[1], score)) {
      throw std::runtime_error(args.scores + ":" + std::to_string(lineno) + ": bad score");
    }
    scores[std::string(fields[0])] = score;
  });

  const auto positive_keys = load_node_list(args.positives);
  const std::set<std::string> positives(positive_keys.begin(), positive_keys.end());
  std::set<std::string> candidates;
  for (const auto& [firm, score] : scores) {
    (void)score;
    candidates.insert(firm);
  }

  EvalReport report = evaluate_category(scores, candidates, positives);
  report.category = args.category;
  report.method = args.method;

  auto out = open_out(args.out);
  out << "category\tmethod\tauc_roc\tauc_pr\tn_candidates\tn_positives\n";
  out << report.category << '\t' << report.method << '\t' << tsv::format_fixed(report.auc_roc, 6)
      << '\t' << tsv::format_fixed(report.auc_pr, 6) << '\t' << report.n_candidates << '\t'
      << report.n_positives << '\n';
  if (!out) throw std::runtime_error("write failed: " + args.out);

  std::cout << "auc_roc\t" << tsv::format_fixed(report.auc_roc, 6) << '\n'
            << "auc_pr\t" << tsv::format_fixed(report.auc_pr, 6) << '\n'
            << "n_candidates\t" << report.n_candidates << '\n'
            << "n_positives\t" << report.n_positives << '\n';

  RunManifest m = base_manifest();
  m.add_input(args.scores);
  m.add_input(args.positives);
  m.config["category"] = args.category;
  m.config["method"] = args.method;
  timer.finish(m, args.out);
}

struct ExportWeightsArgs {
  std::string model;
  std::string features;
  std::string out;
  std::size_t bins = 20;
};

void run_export_weights(const ExportWeightsArgs& args) {
  ManifestTimer timer;
  const EdgeWeightModel model = EdgeWeightModel::load(args.model);
  const FeatureMatrix features = FeatureMatrix::load(args.features);
  const std::vector<double> weights = edge_weights(model, features);
  const auto histogram = weight_histogram(weights, args.bins);
  const double saturation = weight_saturation(weights);

  auto out = open_out(args.out);
  out << "bin_lo\tbin_hi\tcount\tfraction\n";
  const double width = 1.0 / static_cast<double>(args.bins);
  for (std::size_t b = 0; b < histogram.size(); ++b) {
    const double lo = static_cast<double>(b) * width;
    const double hi = b + 1 == histogram.size() ? 1.0 : lo + width;
    const double fraction =
        weights.empty() ? 0.0
                        : static_cast<double>(histogram[b]) / static_cast<double>(weights.size());
    out << tsv::format_double(lo) << '\t' << tsv::format_double(hi) << '\t' << histogram[b] << '\t'
        << tsv::format_fixed(fraction, 6) << '\n';
  }
  out << "# saturation\t" << tsv::format_fixed(saturation, 6) << '\n';
  if (!out) throw std::runtime_error("write failed: " + args.out);

  std::cout << "edges\t" << weights.size() << '\n'
            << "saturation\t" << tsv::format_fixed(saturation, 6) << '\n';

  RunManifest m = base_manifest();
  m.add_input(args.model);
  m.add_input(args.features);
  m.config["bins"] = std::to_string(args.bins);
  timer.finish(m, args.out);
}

}  // namespace

void register_model_commands(CLI::App& app, const CommonFlags& common) {
  (void)common;
  {
    auto args = std::make_shared<TrainArgs>();
    auto* cmd = app.add_subcommand("train", "Fit the edge-weight model by gradient descent");
    cmd->add_option("--features", args->features, "Feature matrix path")->required();
    cmd->add_option("--core", args->core, "Core graph path")->required();
    cmd->add_option("--splits", args->splits, "Split file path")->required();
    cmd->add_option("--config", args->config, "key=value training configuration");
    cmd->add_option("--out", args->out, "Output model path")->required();
    cmd->callback([args]() { run_train(*args); });
  }
  {
    auto args = std::make_shared<PredictArgs>();
    auto* cmd = app.add_subcommand("predict", "Propagate labels and score candidates");
    cmd->add_option("--model", args->model, "Model path")->required();
    cmd->add_option("--features", args->features, "Feature matrix path")->required();
    cmd->add_option("--core", args->core, "Core graph path")->required();
    cmd->add_option("--splits", args->splits, "Split file path")->required();
    cmd->add_option("--tol", args->tol, "Jacobi stopping tolerance (0 = fixed sweeps)");
    cmd->add_option("--max-iter", args->max_iter, "Maximum Jacobi sweeps");
    cmd->add_option("--out", args->out, "Output scores TSV")->required();
    cmd->callback([args]() { run_predict(*args); });
  }
  {
    auto args = std::make_shared<EvaluateArgs>();
    auto* cmd = app.add_subcommand("evaluate", "AUC-ROC and AUC-PR against realized positives");
    cmd->add_option("--scores", args->scores, "Scores TSV from predict")->required();
    cmd->add_option("--positives", args->positives, "Node list of realized positives")->required();
    cmd->add_option("--category", args->category, "Category tag for the report");
    cmd->add_option("--method", args->method, "Method tag for the report");
    cmd->add_option("--out", args->out, "Output report TSV")->required();
    cmd->callback([args]() { run_evaluate(*args); });
  }
  {
    auto args = std::make_shared<ExportWeightsArgs>();
    auto* cmd = app.add_subcommand("export-weights", "Histogram of learned edge weights");
    cmd->add_option("--model", args->model, "Model path")->required();
    cmd->add_option("--features", args->features, "Feature matrix path")->required();
    cmd->add_option("--bins", args->bins, "Histogram bin count");
    cmd->add_option("--out", args->out, "Output histogram TSV")->required();
    cmd->callback([args]() { run_export_weights(*args); });
  }
}

}  // namespace hinscreen::cli
