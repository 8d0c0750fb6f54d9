#include "hinscreen/synthetic_bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <stdexcept>

#include "hinscreen/core_network.hpp"
#include "hinscreen/evaluation.hpp"
#include "hinscreen/rng.hpp"
#include "hinscreen/stats.hpp"
#include "hinscreen/tsv.hpp"

namespace hinscreen {

void PlantedConfig::validate() const {
  if (n_firms < 2) throw std::invalid_argument("n_firms must be >= 2");
  if (n_rel_types < 2) throw std::invalid_argument("n_rel_types must be >= 2");
  if (n_conductive < 1 || n_conductive >= n_rel_types) {
    throw std::invalid_argument("conductive subset must be non-empty and proper");
  }
  if (!(edge_density >= 0.0) || !(aux_density >= 0.0)) {
    throw std::invalid_argument("densities must be >= 0");
  }
  if (!(diffusion_prob >= 0.0 && diffusion_prob <= 1.0)) {
    throw std::invalid_argument("diffusion_prob must lie in [0,1]");
  }
  if (n_seed_firms < 1 || n_seed_firms > n_firms) {
    throw std::invalid_argument("n_seed_firms must lie in [1, n_firms]");
  }
  if (rounds < 1 || round_days < 1) throw std::invalid_argument("rounds and round_days must be >= 1");
  if (cutoff_day < 1 || horizon_day <= cutoff_day) {
    throw std::invalid_argument("need 0 < cutoff_day < horizon_day");
  }
  if (delta_days < 1) throw std::invalid_argument("delta_days must be >= 1");
  train.validate();
  if (paths.max_len < 1 || paths.max_len > 4) {
    throw std::invalid_argument("path max_len must lie in [1,4]");
  }
}

PlantedConfig load_planted_config(const std::string& path) {
  PlantedConfig config;
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
    auto as_size = [&](std::size_t& dest) {
      long long ll;
      if (!tsv::parse_int64(value, ll) || ll < 0) bad();
      dest = static_cast<std::size_t>(ll);
    };
    auto as_int = [&](int& dest) {
      long long ll;
      if (!tsv::parse_int64(value, ll)) bad();
      dest = static_cast<int>(ll);
    };
    auto as_double = [&](double& dest) {
      if (!tsv::parse_double(value, dest)) bad();
    };
    if (key == "n_firms") {
      as_size(config.n_firms);
    } else if (key == "n_aux") {
      as_size(config.n_aux);
    } else if (key == "n_rel_types") {
      as_size(config.n_rel_types);
    } else if (key == "n_conductive") {
      as_size(config.n_conductive);
    } else if (key == "edge_density") {
      as_double(config.edge_density);
    } else if (key == "aux_density") {
      as_double(config.aux_density);
    } else if (key == "diffusion_prob") {
      as_double(config.diffusion_prob);
    } else if (key == "n_seed_firms") {
      as_size(config.n_seed_firms);
    } else if (key == "rounds") {
      as_int(config.rounds);
    } else if (key == "round_days") {
      as_int(config.round_days);
    } else if (key == "start") {
      auto date = Date::parse(value);
      if (!date) bad();
      config.start = *date;
    } else if (key == "cutoff_day") {
      as_int(config.cutoff_day);
    } else if (key == "delta_days") {
      as_int(config.delta_days);
    } else if (key == "horizon_day") {
      as_int(config.horizon_day);
    } else if (key == "seed") {
      long long ll;
      if (!tsv::parse_int64(value, ll) || ll < 0) bad();
      config.rng_seed = static_cast<std::uint64_t>(ll);
    } else if (key == "train_learning_rate") {
      as_double(config.train.learning_rate);
    } else if (key == "train_epochs") {
      as_int(config.train.epochs);
    } else if (key == "train_tol") {
      as_double(config.train.tol);
    } else if (key == "train_max_iter") {
      as_int(config.train.max_iter);
    } else if (key == "train_hidden_dim") {
      as_size(config.train.hidden_dim);
    } else if (key == "train_activation") {
      config.train.hidden_activation = value;
    } else if (key == "path_max_len") {
      as_int(config.paths.max_len);
    } else if (key == "path_top_k") {
      as_size(config.paths.top_k);
    } else if (key == "path_expansion_cap") {
      as_size(config.paths.expansion_cap);
    } else {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": unknown key " + key);
    }
  });
  config.validate();
  return config;
}

namespace {

std::string padded(const char* prefix, std::size_t index, std::size_t total) {
  int width = 1;
  for (std::size_t v = total; v >= 10 && width < 20; v /= 10) ++width;
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%s%0*llu", prefix, width,
                static_cast<unsigned long long>(index));
  return buf;
}

constexpr NodeKind kAuxKinds[] = {NodeKind::Person, NodeKind::Location, NodeKind::Goods,
                                  NodeKind::Page};

}  // namespace

PlantedData generate_hin(const PlantedConfig& config, std::vector<std::string>* warnings) {
  config.validate();
  auto warn = [&](const std::string& msg) {
    if (warnings) warnings->push_back(msg);
  };

  PlantedData data;
  Rng rng(config.rng_seed);

  std::vector<EntityIndex> firms(config.n_firms);
  for (std::size_t i = 0; i < config.n_firms; ++i) {
    firms[i] = data.store.intern_entity(padded("F", i + 1, config.n_firms));
    data.store.set_kind(firms[i], NodeKind::Firm);
  }
  std::vector<EntityIndex> aux(config.n_aux);
  for (std::size_t i = 0; i < config.n_aux; ++i) {
    aux[i] = data.store.intern_entity(padded("A", i + 1, std::max<std::size_t>(1, config.n_aux)));
    data.store.set_kind(aux[i], kAuxKinds[i % 4]);
  }

  const Date edge_date = config.start.plus_days(-30);
  // Conductive rel types come first and are always firm-firm; the rest
  // alternate firm-firm and firm-aux so paths cross node kinds.
  struct RelEdge {
    EntityIndex a, b;
  };
  std::vector<std::vector<RelEdge>> conductive_edges(config.n_conductive);
  for (std::size_t r = 0; r < config.n_rel_types; ++r) {
    const RelTypeIndex rel =
        data.store.intern_rel_type(padded("rel", r + 1, config.n_rel_types));
    const bool conductive = r < config.n_conductive;
    const bool firm_firm = conductive || (r % 2 == 0) || config.n_aux == 0;
    const std::size_t want = static_cast<std::size_t>(std::llround(
        (firm_firm ? config.edge_density : config.aux_density) * static_cast<double>(config.n_firms)));
    std::set<std::pair<EntityIndex, EntityIndex>> seen;
    std::size_t attempts = 0;
    while (seen.size() < want && attempts < 20 * want + 100) {
      ++attempts;
      const auto u = firms[uniform_below(rng, config.n_firms)];
      EntityIndex v;
      if (firm_firm) {
        v = firms[uniform_below(rng, config.n_firms)];
        if (u == v) continue;
      } else {
        v = aux[uniform_below(rng, config.n_aux)];
      }
      const auto lo = std::min(u, v), hi = std::max(u, v);
      if (!seen.emplace(lo, hi).second) continue;
      data.store.add_relation({u, v, rel, edge_date, edge_date, std::nullopt});
      if (conductive) conductive_edges[r].push_back({u, v});
    }
  }

  // Seed firms, then dated diffusion rounds: each conductive edge gets one
  // crossing attempt ever, made the first round exactly one endpoint is
  // already infected.
  std::vector<int> infected_round(config.n_firms + config.n_aux + 1, -1);
  std::set<std::size_t> seed_picks;
  while (seed_picks.size() < config.n_seed_firms) {
    seed_picks.insert(uniform_below(rng, config.n_firms));
  }
  for (std::size_t i : seed_picks) infected_round[firms[i]] = 0;

  std::size_t isolated_seeds = 0;
  for (std::size_t i : seed_picks) {
    bool touched = false;
    for (const auto& per_rel : conductive_edges) {
      for (const auto& e : per_rel) {
        if (e.a == firms[i] || e.b == firms[i]) {
          touched = true;
          break;
        }
      }
      if (touched) break;
    }
    if (!touched) ++isolated_seeds;
  }
  if (isolated_seeds > 0) {
    warn(std::to_string(isolated_seeds) + " seed firm(s) have no conductive relations");
  }

  std::vector<std::vector<bool>> attempted(config.n_conductive);
  for (std::size_t r = 0; r < config.n_conductive; ++r) {
    attempted[r].assign(conductive_edges[r].size(), false);
  }
  for (int round = 1; round <= config.rounds; ++round) {
    for (std::size_t r = 0; r < config.n_conductive; ++r) {
      for (std::size_t e = 0; e < conductive_edges[r].size(); ++e) {
        if (attempted[r][e]) continue;
        const auto& edge = conductive_edges[r][e];
        const int ra = infected_round[edge.a], rb = infected_round[edge.b];
        const bool a_in = ra >= 0 && ra < round, b_in = rb >= 0 && rb < round;
        if (!a_in && !b_in) continue;
        attempted[r][e] = true;
        if (a_in && b_in) continue;
        if (uniform01(rng) < config.diffusion_prob) {
          infected_round[a_in ? edge.b : edge.a] = round;
        }
      }
    }
  }

  std::size_t spread = 0;
  for (std::size_t i = 0; i < config.n_firms; ++i) {
    const int round = infected_round[firms[i]];
    if (round < 0) continue;
    if (round > 0) ++spread;
    const Date when = config.start.plus_days(static_cast<std::int64_t>(round) * config.round_days);
    const std::string& key = data.store.entity(firms[i]).key;
    data.events.push_back({when, key, kPlantedCategory});
    data.truth.infected.emplace(key, when);
  }
  if (spread == 0) warn("diffusion produced no infections beyond the seed firms");

  for (std::size_t r = 0; r < config.n_conductive; ++r) {
    data.truth.conductive.insert(data.store.rel_type_name(static_cast<RelTypeIndex>(r)));
  }
  std::sort(data.events.begin(), data.events.end(), [](const NewsEvent& a, const NewsEvent& b) {
    if (a.date != b.date) return a.date < b.date;
    return a.firm < b.firm;
  });
  return data;
}

const char* bench_method_name(BenchMethod method) {
  switch (method) {
    case BenchMethod::LpFixed:
      return "lp-fixed";
    case BenchMethod::LpCoreRelation:
      return "lp-core-relation";
    case BenchMethod::LpPath:
      return "lp-path";
    case BenchMethod::LpPathSegment:
      return "lp-path-segment";
  }
  return "?";
}

std::optional<BenchMethod> parse_bench_method(std::string_view name) {
  if (name == "lp-fixed") return BenchMethod::LpFixed;
  if (name == "lp-core-relation" || name == "lp-relation") return BenchMethod::LpCoreRelation;
  if (name == "lp-path") return BenchMethod::LpPath;
  if (name == "lp-path-segment" || name == "lp-segment") return BenchMethod::LpPathSegment;
  return std::nullopt;
}

std::vector<BenchMethod> parse_bench_methods(std::string_view csv) {
  std::vector<BenchMethod> out;
  std::size_t pos = 0;
  while (pos <= csv.size()) {
    const auto comma = csv.find(',', pos);
    const auto token = csv.substr(pos, comma == std::string_view::npos ? csv.size() - pos
                                                                       : comma - pos);
    if (!token.empty()) {
      auto method = parse_bench_method(token);
      if (!method) throw std::invalid_argument("unknown method: " + std::string(token));
      out.push_back(*method);
    }
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  if (out.empty()) throw std::invalid_argument("empty method list");
  return out;
}

std::string BenchReport::table() const {
  std::string out =
      "method\tseeds_ok\tauc_roc_mean\tauc_roc_sd\tauc_pr_mean\tauc_pr_sd\tweight_saturation_mean\n";
  char buf[64];
  for (const auto& m : methods) {
    out += bench_method_name(m.method);
    std::snprintf(buf, sizeof(buf), "\t%zu", m.seeds_ok);
    out += buf;
    for (double v : {m.auc_roc_mean, m.auc_roc_sd, m.auc_pr_mean, m.auc_pr_sd, m.saturation_mean}) {
      std::snprintf(buf, sizeof(buf), "\t%.6f", v);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

namespace {

struct SeedArtifacts {
  PlantedData data;
  BuildCoreResult core;
  std::set<std::string> sources;
  std::set<std::string> targets;
  PredictionSets prediction;
  // lazily built, shared by lp-path and lp-path-segment
  bool paths_ready = false;
  std::vector<std::vector<PathSignature>> edge_paths;
};

void finalize(MethodSummary& summary) {
  summary.seeds_ok = summary.per_seed_auc_roc.size();
  if (summary.seeds_ok == 0) return;
  summary.auc_roc_mean = stats::mean(summary.per_seed_auc_roc);
  summary.auc_roc_sd = stats::sample_sd(summary.per_seed_auc_roc);
  summary.auc_pr_mean = stats::mean(summary.per_seed_auc_pr);
  summary.auc_pr_sd = stats::sample_sd(summary.per_seed_auc_pr);
  summary.saturation_mean = stats::mean(summary.per_seed_saturation);
}

}  // namespace

BenchReport run_benchmark(const PlantedConfig& config, const std::vector<BenchMethod>& methods,
                          const std::vector<std::uint64_t>& seeds, int threads) {
  config.validate();
  if (methods.empty()) throw std::invalid_argument("no methods requested");
  if (seeds.size() < 2) throw std::invalid_argument("need at least 2 seeds for averaging");

  BenchReport report;
  report.seeds_requested = seeds.size();
  report.methods.resize(methods.size());
  for (std::size_t m = 0; m < methods.size(); ++m) report.methods[m].method = methods[m];

  const bool wants_paths =
      std::any_of(methods.begin(), methods.end(), [](BenchMethod m) {
        return m == BenchMethod::LpPath || m == BenchMethod::LpPathSegment;
      });

  for (std::uint64_t seed : seeds) {
    SeedArtifacts art;
    try {
      PlantedConfig c = config;
      c.rng_seed = seed;
      c.paths.threads = static_cast<unsigned>(std::max(1, threads));
      art.data = generate_hin(c);

      auto lists = build_lists(art.data.events);
      auto it = lists.find(kPlantedCategory);
      if (it == lists.end()) throw std::runtime_error("no events generated");
      const CategoryList& list = it->second;

      SplitSpec spec;
      spec.cutoff = config.start.plus_days(config.cutoff_day);
      spec.delta_days = config.delta_days;
      spec.horizon_end = config.start.plus_days(config.horizon_day);

      std::set<std::string> universe;
      for (std::size_t i = 0; i < art.data.store.entity_count(); ++i) {
        const Entity& ent = art.data.store.entity(static_cast<EntityIndex>(i));
        if (ent.kind == NodeKind::Firm) universe.insert(ent.key);
      }
      art.core = build_core(art.data.store,
                            std::vector<std::string>(universe.begin(), universe.end()));

      std::tie(art.sources, art.targets) = split_source_target(list, spec);
      art.prediction = prediction_targets(list, universe, spec);
      if (art.sources.empty()) throw std::runtime_error("no source firms before the window");
      if (art.targets.empty()) throw std::runtime_error("no target firms in the window");
      if (art.prediction.positives.empty()) throw std::runtime_error("no realized positives");

      if (wants_paths) {
        PathOptions popts = config.paths;
        popts.threads = static_cast<unsigned>(std::max(1, threads));
        art.edge_paths = collect_edge_paths(art.data.store, art.core.graph, popts);
        art.paths_ready = true;
      }
    } catch (const std::exception& ex) {
      report.failures.push_back("seed " + std::to_string(seed) + ": " + ex.what());
      continue;
    }

    const CoreGraph& core = art.core.graph;
    for (std::size_t m = 0; m < methods.size(); ++m) {
      try {
        std::vector<double> weights;
        double saturation = 1.0;
        if (methods[m] == BenchMethod::LpFixed) {
          weights = core.unit_weights();
        } else {
          FeatureMatrix features;
          switch (methods[m]) {
            case BenchMethod::LpCoreRelation:
              features = core_relation_features(core);
              break;
            case BenchMethod::LpPath: {
              auto vocab = select_top_paths(art.data.store, art.edge_paths, config.paths.top_k);
              features = path_features(art.data.store, core, art.edge_paths, vocab);
              break;
            }
            default:
              features = path_segment_features(art.data.store, core, art.edge_paths);
              break;
          }
          TrainConfig tc = config.train;
          tc.seed = seed;
          auto trained = train(features, core, art.sources, art.targets, tc);
          weights = edge_weights(trained.model, features);
          saturation = weight_saturation(weights);
        }

        std::set<std::string> known_keys = art.sources;
        known_keys.insert(art.targets.begin(), art.targets.end());
        auto known = resolve_nodes(core, known_keys);
        JacobiOptions jopts;
        jopts.tol = config.train.tol;
        jopts.max_iter = config.train.max_iter;
        auto solved = predict(core, weights, known, jopts);

        std::map<std::string, double> scores;
        std::set<std::string> candidates;
        for (const auto& firm : art.prediction.candidates) {
          candidates.insert(firm);
          auto node = core.find_node(firm);
          scores[firm] = node ? solved.y[*node] : 0.0;
        }
        auto eval = evaluate_category(scores, candidates, art.prediction.positives);

        auto& summary = report.methods[m];
        summary.per_seed_auc_roc.push_back(eval.auc_roc);
        summary.per_seed_auc_pr.push_back(eval.auc_pr);
        summary.per_seed_saturation.push_back(saturation);
      } catch (const std::exception& ex) {
        report.failures.push_back("seed " + std::to_string(seed) + " " +
                                  bench_method_name(methods[m]) + ": " + ex.what());
      }
    }
  }

  for (auto& summary : report.methods) finalize(summary);
  return report;
}

}  // namespace hinscreen
