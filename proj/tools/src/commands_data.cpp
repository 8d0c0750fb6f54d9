#include <iostream>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "commands.hpp"
#include "manifest.hpp"

#include "hinscreen/core_network.hpp"
#include "hinscreen/feature_extract.hpp"
#include "hinscreen/hin_store.hpp"
#include "hinscreen/label_store.hpp"
#include "hinscreen/version.hpp"

namespace hinscreen::cli {

namespace {

std::set<std::string> split_csv(const std::string& csv) {
  std::set<std::string> out;
  std::size_t pos = 0;
  while (pos <= csv.size()) {
    const auto comma = csv.find(',', pos);
    const auto token =
        csv.substr(pos, comma == std::string::npos ? csv.size() - pos : comma - pos);
    if (!token.empty()) out.insert(token);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

RunManifest base_manifest() {
  RunManifest m;
  m.argv = invocation();
  m.version = kVersion;
  return m;
}

struct IngestArgs {
  std::vector<std::string> edges;
  std::vector<std::string> nodes;
  std::string out;
  std::size_t min_count = 100;
  std::string blacklist;
  double ownership_threshold = 0.05;
  double tau = 0.9;
  bool no_merge = false;
};

void run_ingest(const IngestArgs& args) {
  ManifestTimer timer;
  IngestConfig config;
  config.min_rel_count = args.min_count;
  config.blacklist = split_csv(args.blacklist);
  config.ownership_threshold = args.ownership_threshold;
  config.merge.name_tau = args.tau;
  config.do_merge = !args.no_merge;

  HinStore store;
  const IngestReport report = ingest_edges(store, args.edges, args.nodes, config);
  store.save(args.out);

  for (const auto& err : report.record_errors) std::cerr << "record error: " << err << '\n';
  for (const auto& warning : report.warnings) std::cerr << "warning: " << warning << '\n';
  std::cout << "sources_loaded\t" << report.sources_loaded << '\n'
            << "entities\t" << report.entities << '\n'
            << "relations\t" << report.relations << '\n'
            << "merged_entities\t" << report.merged_entities << '\n'
            << "record_errors\t" << report.record_errors.size() << '\n';
  for (const auto& [reason, count] : report.dropped_relations) {
    std::cout << "dropped:" << reason << '\t' << count << '\n';
  }

  RunManifest m = base_manifest();
  for (const auto& p : args.edges) m.add_input(p);
  for (const auto& p : args.nodes) m.add_input(p);
  m.config["min_count"] = std::to_string(args.min_count);
  m.config["blacklist"] = args.blacklist;
  m.config["ownership_threshold"] = std::to_string(args.ownership_threshold);
  m.config["tau"] = std::to_string(args.tau);
  m.config["merge"] = args.no_merge ? "off" : "on";
  timer.finish(m, args.out);
}

struct BuildCoreArgs {
  std::string store;
  std::string universe;
  std::string out;
};

void run_build_core(const BuildCoreArgs& args) {
  ManifestTimer timer;
  const HinStore store = HinStore::load(args.store);
  const auto universe = load_node_list(args.universe);
  const BuildCoreResult built = build_core(store, universe);
  built.graph.save(args.out);

  std::cout << "nodes\t" << built.graph.node_count() << '\n'
            << "edges\t" << built.graph.edge_count() << '\n'
            << "rel_types\t" << built.graph.rel_catalog().size() << '\n'
            << "isolated\t" << built.isolated.size() << '\n';

  RunManifest m = base_manifest();
  m.add_input(args.store);
  m.add_input(args.universe);
  timer.finish(m, args.out);
}

struct SplitArgs {
  std::string events;
  std::string universe;
  std::string cutoff;
  std::string horizon_end;
  std::string category;
  std::string out;
  int delta = 31;
  int sparse_delta = 182;
  std::size_t source_floor = 500;
  bool no_auto_delta = false;
};

void run_split(const SplitArgs& args) {
  ManifestTimer timer;
  const auto cutoff = Date::parse(args.cutoff);
  if (!cutoff) throw std::runtime_error("bad --cutoff date: " + args.cutoff);
  const auto horizon = Date::parse(args.horizon_end);
  if (!horizon) throw std::runtime_error("bad --horizon-end date: " + args.horizon_end);

  const auto loaded = load_events(args.events, {});
  for (const auto& err : loaded.record_errors) std::cerr << "record error: " << err << '\n';
  const auto lists = build_lists(loaded.events);
  const auto it = lists.find(args.category);
  if (it == lists.end()) throw std::runtime_error("no events for category: " + args.category);
  const CategoryList& list = it->second;

  CategorySplit split;
  split.category = args.category;
  split.spec.cutoff = *cutoff;
  split.spec.horizon_end = *horizon;
  split.spec.delta_days =
      args.no_auto_delta
          ? args.delta
          : resolve_delta(list, *cutoff, args.delta, args.sparse_delta, args.source_floor);
  if (!split.spec.valid()) throw std::runtime_error("cutoff must precede horizon end");

  const auto universe_keys = load_node_list(args.universe);
  const std::set<std::string> universe(universe_keys.begin(), universe_keys.end());
  std::tie(split.sources, split.targets) = split_source_target(list, split.spec);
  const PredictionSets sets = prediction_targets(list, universe, split.spec);
  for (const auto& firm : sets.candidates) {
    split.candidates[firm] = sets.positives.count(firm) ? 1 : 0;
  }
  save_split(args.out, split);

  std::cout << "category\t" << split.category << '\n'
            << "delta_days\t" << split.spec.delta_days << '\n'
            << "sources\t" << split.sources.size() << '\n'
            << "targets\t" << split.targets.size() << '\n'
            << "candidates\t" << split.candidates.size() << '\n'
            << "positives\t" << sets.positives.size() << '\n';

  RunManifest m = base_manifest();
  m.add_input(args.events);
  m.add_input(args.universe);
  m.config["cutoff"] = args.cutoff;
  m.config["horizon_end"] = args.horizon_end;
  m.config["category"] = args.category;
  m.config["delta"] = std::to_string(args.delta);
  m.config["resolved_delta"] = std::to_string(split.spec.delta_days);
  timer.finish(m, args.out);
}

struct FeaturesArgs {
  std::string store;
  std::string core;
  std::string scheme = "segment";
  std::string out;
  int max_len = 4;
  std::size_t top_k = 3000;
  std::size_t expansion_cap = 10000;
  unsigned threads = 1;
};

void run_features(const FeaturesArgs& args) {
  ManifestTimer timer;
  const auto scheme = parse_feature_scheme(args.scheme);
  if (!scheme) throw std::runtime_error("unknown --scheme: " + args.scheme);

  const HinStore store = HinStore::load(args.store);
  const CoreGraph core = CoreGraph::load(args.core);
  PathOptions options;
  options.max_len = args.max_len;
  options.top_k = args.top_k;
  options.expansion_cap = args.expansion_cap;
  options.threads = args.threads;

  const FeatureMatrix matrix = extract_features(store, core, *scheme, options);
  matrix.save(args.out);

  std::size_t nnz = 0;
  for (const auto& row : matrix.rows) nnz += row.size();
  std::cout << "scheme\t" << args.scheme << '\n'
            << "rows\t" << matrix.row_count() << '\n'
            << "cols\t" << matrix.col_count() << '\n'
            << "nnz\t" << nnz << '\n';

  RunManifest m = base_manifest();
  m.add_input(args.store);
  m.add_input(args.core);
  m.config["scheme"] = args.scheme;
  m.config["max_len"] = std::to_string(args.max_len);
  m.config["top_k"] = std::to_string(args.top_k);
  m.config["expansion_cap"] = std::to_string(args.expansion_cap);
  timer.finish(m, args.out);
}

}  // namespace

void register_data_commands(CLI::App& app, const CommonFlags& common) {
  {
    auto args = std::make_shared<IngestArgs>();
    auto* cmd = app.add_subcommand("ingest", "Load edge and node files into a network store");
    cmd->add_option("--edges", args->edges, "Edge TSV files")->required()->expected(-1);
    cmd->add_option("--nodes", args->nodes, "Node attribute TSV files")->expected(-1);
    cmd->add_option("--min-count", args->min_count, "Drop rel types occurring fewer times");
    cmd->add_option("--blacklist", args->blacklist, "Comma-separated rel types to drop");
    cmd->add_option("--ownership-threshold", args->ownership_threshold,
                    "Drop weighted relations below this share");
    cmd->add_option("--tau", args->tau, "Name-similarity threshold for entity merging");
    cmd->add_flag("--no-merge", args->no_merge, "Skip entity resolution");
    cmd->add_option("--out", args->out, "Output store path")->required();
    cmd->callback([args]() { run_ingest(*args); });
  }
  {
    auto args = std::make_shared<BuildCoreArgs>();
    auto* cmd = app.add_subcommand("build-core", "Project the store onto the firm universe");
    cmd->add_option("--store", args->store, "Store path")->required();
    cmd->add_option("--universe", args->universe, "Node list of universe firms")->required();
    cmd->add_option("--out", args->out, "Output core path")->required();
    cmd->callback([args]() { run_build_core(*args); });
  }
  {
    auto args = std::make_shared<SplitArgs>();
    auto* cmd = app.add_subcommand("split", "Temporal source/target/candidate split");
    cmd->add_option("--events", args->events, "Event TSV (date, firm, category)")->required();
    cmd->add_option("--universe", args->universe, "Node list of universe firms")->required();
    cmd->add_option("--cutoff", args->cutoff, "Training cutoff date YYYY-MM-DD")->required();
    cmd->add_option("--delta", args->delta, "Target window length in days");
    cmd->add_option("--horizon-end", args->horizon_end, "Evaluation horizon date")->required();
    cmd->add_option("--category", args->category, "Category tag")->required();
    cmd->add_option("--sparse-delta", args->sparse_delta, "Window used when sources are sparse");
    cmd->add_option("--source-floor", args->source_floor,
                    "Minimum source count before widening the window");
    cmd->add_flag("--no-auto-delta", args->no_auto_delta, "Never widen the target window");
    cmd->add_option("--out", args->out, "Output split path")->required();
    cmd->callback([args]() { run_split(*args); });
  }
  {
    auto args = std::make_shared<FeaturesArgs>();
    auto* cmd = app.add_subcommand("features", "Extract per-edge feature rows from the store");
    cmd->add_option("--store", args->store, "Store path")->required();
    cmd->add_option("--core", args->core, "Core graph path")->required();
    cmd->add_option("--scheme", args->scheme, "relation | path | segment");
    cmd->add_option("--max-len", args->max_len, "Maximum path length (1-4)");
    cmd->add_option("--top-k", args->top_k, "Path vocabulary size");
    cmd->add_option("--expansion-cap", args->expansion_cap,
                    "Skip intermediates with more incident relations (0 = unlimited)");
    cmd->add_option("--out", args->out, "Output feature matrix path")->required();
    cmd->callback([args, &common]() {
      args->threads = static_cast<unsigned>(std::max(1, common.threads));
      run_features(*args);
    });
  }
}

}  // namespace hinscreen::cli
