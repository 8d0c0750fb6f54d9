#include <fstream>
#include <iostream>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "commands.hpp"
#include "manifest.hpp"

#include "hinscreen/core_network.hpp"
#include "hinscreen/event_study.hpp"
#include "hinscreen/interpretability.hpp"
#include "hinscreen/label_store.hpp"
#include "hinscreen/synthetic_bench.hpp"
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

struct EventStudyArgs {
  std::string prices;
  std::string events;
  std::string out;
  int window = 10;
};

void run_event_study(const EventStudyArgs& args) {
  ManifestTimer timer;
  const auto series_list = load_price_file(args.prices);
  const auto loaded = load_events(args.events, {});
  for (const auto& err : loaded.record_errors) std::cerr << "record error: " << err << '\n';

  std::map<std::string, std::vector<Date>> events_by_firm;
  for (const auto& event : loaded.events) events_by_firm[event.firm].push_back(event.date);

  std::vector<double> with_news, without_news;
  std::vector<std::string> warnings;
  for (const auto& series : series_list) {
    const auto it = events_by_firm.find(series.symbol);
    static const std::vector<Date> kNone;
    const auto& dates = it == events_by_firm.end() ? kNone : it->second;
    try {
      auto [with, without] = window_log_returns(series, dates, args.window, &warnings);
      with_news.insert(with_news.end(), with.values.begin(), with.values.end());
      without_news.insert(without_news.end(), without.values.begin(), without.values.end());
    } catch (const std::exception& ex) {
      warnings.push_back(series.symbol + ": " + ex.what());
    }
  }
  for (const auto& warning : warnings) std::cerr << "warning: " << warning << '\n';

  const SampleStats with_stats = sample_stats(with_news);
  const SampleStats without_stats = sample_stats(without_news);
  const KsResult ks = ks_two_sample(with_news, without_news);

  auto out = open_out(args.out);
  out << "group\tcount\tq01\tq05\tq50\tq95\tq99\tskewness\n";
  auto emit = [&](const char* group, const SampleStats& stats) {
    out << group << '\t' << stats.count;
    for (const auto& [level, value] : stats.quantiles) {
      (void)level;
      out << '\t' << tsv::format_double(value);
    }
    out << '\t' << tsv::format_double(stats.skewness) << '\n';
  };
  emit("with_news", with_stats);
  emit("without_news", without_stats);
  out << "# ks_d\t" << tsv::format_double(ks.d) << '\n';
  out << "# ks_p\t" << tsv::format_double(ks.p_value) << '\n';
  if (!out) throw std::runtime_error("write failed: " + args.out);

  std::cout << "with_news\t" << with_stats.count << '\n'
            << "without_news\t" << without_stats.count << '\n'
            << "ks_d\t" << tsv::format_double(ks.d) << '\n'
            << "ks_p\t" << tsv::format_double(ks.p_value) << '\n';

  RunManifest m = base_manifest();
  m.add_input(args.prices);
  m.add_input(args.events);
  m.config["window"] = std::to_string(args.window);
  timer.finish(m, args.out);
}

struct ExplainArgs {
  std::string model;
  std::string features;
  std::string core;
  std::string splits;
  std::string config;
  std::string out;
  std::string peaks_out;
  std::size_t rank = 50;
  int iters = 200;
  int reps = 30;
  std::uint64_t factor_seed = 1;
  std::uint64_t seed_base = 100;
  std::size_t top_bases = 5;
  std::size_t top_peaks = 3;
  bool linear_nmf = false;
};

void run_explain(const ExplainArgs& args, int threads) {
  ManifestTimer timer;
  const FeatureMatrix features = FeatureMatrix::load(args.features);

  BnmfOptions options;
  options.rank = args.rank;
  options.iters = args.iters;
  options.seed = args.factor_seed;
  options.variant = args.linear_nmf ? BnmfVariant::Linear : BnmfVariant::Logistic;
  options.threads = threads;
  const FactorModel factors = bnmf(features, options);

  std::function<EdgeWeightModel(int)> trainer;
  RunManifest m = base_manifest();
  m.add_input(args.features);
  m.seeds.push_back(args.factor_seed);
  if (args.reps == 1 && !args.model.empty()) {
    const EdgeWeightModel model = EdgeWeightModel::load(args.model);
    m.add_input(args.model);
    trainer = [model](int) { return model; };
  } else {
    if (args.core.empty() || args.splits.empty()) {
      throw std::runtime_error("repeated runs need --core and --splits to retrain");
    }
    const CoreGraph core = CoreGraph::load(args.core);
    features.require_match(core);
    const CategorySplit split = load_split(args.splits);
    TrainConfig config = args.config.empty() ? TrainConfig{} : parse_train_config(args.config);
    m.add_input(args.core);
    m.add_input(args.splits);
    if (!args.config.empty()) m.add_input(args.config);
    for (int rep = 0; rep < args.reps; ++rep) m.seeds.push_back(args.seed_base + rep);
    trainer = [&features, core, split, config, base = args.seed_base](int rep) {
      TrainConfig c = config;
      c.seed = base + static_cast<std::uint64_t>(rep);
      return train(features, core, split.sources, split.targets, c).model;
    };
  }

  const ImportanceTable table = repeated_importance(factors, trainer, args.reps, threads);
  for (const auto& failure : table.failures) std::cerr << "warning: " << failure << '\n';

  auto out = open_out(args.out);
  out << "rank\tbasis\tmean_signed\tmean_abs\tconstant_column\n";
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    out << i + 1 << '\t' << row.basis << '\t' << tsv::format_double(row.mean_signed) << '\t'
        << tsv::format_double(row.mean_abs) << '\t' << (row.constant_column ? 1 : 0) << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + args.out);

  const std::string peaks_path =
      args.peaks_out.empty() ? args.out + ".peaks.tsv" : args.peaks_out;
  auto peaks_out = open_out(peaks_path);
  peaks_out << "basis\tsegment\trel_type\tvalue\n";
  if (features.scheme == FeatureScheme::PathSegment) {
    const std::size_t shown = std::min(args.top_bases, table.rows.size());
    for (std::size_t i = 0; i < shown; ++i) {
      for (const auto& peak : segment_peaks(factors, features, table.rows[i].basis, args.top_peaks)) {
        peaks_out << table.rows[i].basis << '\t' << peak.segment << '\t' << peak.rel_type << '\t'
                  << tsv::format_double(peak.value) << '\n';
      }
    }
  } else {
    peaks_out << "# segment peaks need path-segment features\n";
    std::cerr << "note: segment peaks skipped (features are not path-segment)\n";
  }
  if (!peaks_out) throw std::runtime_error("write failed: " + peaks_path);

  std::cout << "bases\t" << table.rows.size() << '\n'
            << "repetitions_ok\t" << table.succeeded << '\n'
            << "objective_initial\t" << tsv::format_double(factors.objective_trace.front()) << '\n'
            << "objective_final\t" << tsv::format_double(factors.objective_trace.back()) << '\n';

  m.config["rank"] = std::to_string(args.rank);
  m.config["iters"] = std::to_string(args.iters);
  m.config["reps"] = std::to_string(args.reps);
  m.config["variant"] = args.linear_nmf ? "linear" : "logistic";
  timer.finish(m, args.out);
}

struct BenchArgs {
  std::string config;
  std::string methods = "lp-fixed,lp-core-relation,lp-path,lp-path-segment";
  std::string out;
  int seeds = 10;
  std::uint64_t seed_base = 1;
};

void run_bench(const BenchArgs& args, int threads) {
  ManifestTimer timer;
  const PlantedConfig config =
      args.config.empty() ? PlantedConfig{} : load_planted_config(args.config);
  const auto methods = parse_bench_methods(args.methods);
  if (args.seeds < 2) throw std::runtime_error("need at least 2 seeds");
  std::vector<std::uint64_t> seeds(static_cast<std::size_t>(args.seeds));
  for (std::size_t i = 0; i < seeds.size(); ++i) seeds[i] = args.seed_base + i;

  const BenchReport report = run_benchmark(config, methods, seeds, threads);
  for (const auto& failure : report.failures) std::cerr << "failure: " << failure << '\n';

  const std::string table = report.table();
  auto out = open_out(args.out);
  out << table;
  if (!out) throw std::runtime_error("write failed: " + args.out);
  std::cout << table;

  RunManifest m = base_manifest();
  if (!args.config.empty()) m.add_input(args.config);
  m.config["methods"] = args.methods;
  m.seeds = seeds;
  timer.finish(m, args.out);
}

}  // namespace

void register_analysis_commands(CLI::App& app, const CommonFlags& common) {
  {
    auto args = std::make_shared<EventStudyArgs>();
    auto* cmd = app.add_subcommand("event-study",
                                   "Windowed log returns with/without events, stats, KS test");
    cmd->add_option("--prices", args->prices, "Price TSV (symbol, date, close)")->required();
    cmd->add_option("--events", args->events, "Event TSV (date, firm, category)")->required();
    cmd->add_option("--window", args->window, "Window length in trading days (even)");
    cmd->add_option("--out", args->out, "Output stats TSV")->required();
    cmd->callback([args]() { run_event_study(*args); });
  }
  {
    auto args = std::make_shared<ExplainArgs>();
    auto* cmd = app.add_subcommand("explain",
                                   "Factorize features and rank bases by partial dependence");
    cmd->add_option("--model", args->model, "Trained model (used when --reps 1)");
    cmd->add_option("--features", args->features, "Feature matrix path")->required();
    cmd->add_option("--core", args->core, "Core graph path (for retraining)");
    cmd->add_option("--splits", args->splits, "Split file path (for retraining)");
    cmd->add_option("--config", args->config, "Training configuration (for retraining)");
    cmd->add_option("--rank", args->rank, "Factorization rank");
    cmd->add_option("--iters", args->iters, "Factorization iterations");
    cmd->add_option("--reps", args->reps, "Training repetitions to average over");
    cmd->add_option("--factor-seed", args->factor_seed, "Factorization seed");
    cmd->add_option("--seed-base", args->seed_base, "First training seed");
    cmd->add_option("--top-bases", args->top_bases, "Bases to describe in the peaks file");
    cmd->add_option("--top-peaks", args->top_peaks, "Catalog entries per segment");
    cmd->add_flag("--linear-nmf", args->linear_nmf, "Least-squares factorization instead of logistic");
    cmd->add_option("--out", args->out, "Output importance TSV")->required();
    cmd->add_option("--peaks-out", args->peaks_out, "Output peaks TSV (default <out>.peaks.tsv)");
    cmd->callback([args, &common]() { run_explain(*args, std::max(1, common.threads)); });
  }
  {
    auto args = std::make_shared<BenchArgs>();
    auto* cmd = app.add_subcommand("bench", "Planted-structure benchmark over method variants");
    cmd->add_option("--config", args->config, "Planted configuration (key=value)");
    cmd->add_option("--methods", args->methods, "Comma-separated method list");
    cmd->add_option("--seeds", args->seeds, "Number of seeds");
    cmd->add_option("--seed-base", args->seed_base, "First seed value");
    cmd->add_option("--out", args->out, "Output metric table TSV")->required();
    cmd->callback([args, &common]() { run_bench(*args, std::max(1, common.threads)); });
  }
}

}  // namespace hinscreen::cli
