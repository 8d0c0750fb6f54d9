#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hinscreen/dates.hpp"
#include "hinscreen/feature_extract.hpp"
#include "hinscreen/hin_store.hpp"
#include "hinscreen/label_store.hpp"
#include "hinscreen/propagation.hpp"

namespace hinscreen {

// Planted-structure generator: a random typed multigraph over firms plus
// auxiliary nodes, with labels diffusing from seed firms across a hidden
// conductive subset of relation types in dated rounds.
struct PlantedConfig {
  std::size_t n_firms = 2000;
  std::size_t n_aux = 500;
  std::size_t n_rel_types = 20;
  std::size_t n_conductive = 4;  // the first n_conductive rel types are conductive (all firm-firm)
  double edge_density = 0.3;     // firm-firm edges per rel type = round(edge_density * n_firms)
  double aux_density = 0.4;      // firm-aux edges per aux-flavored rel type
  double diffusion_prob = 0.55;  // per conductive edge, one attempt ever
  std::size_t n_seed_firms = 40;
  int rounds = 26;
  int round_days = 14;
  Date start = Date::from_ymd(2015, 1, 1);
  // Split cutoff = start + cutoff_day. Sits early in the diffusion's growth
  // phase so the window after cutoff + delta still sees fresh infections on
  // every seed; by late rounds the epidemic has exhausted its reachable set.
  int cutoff_day = 100;
  int delta_days = 31;
  int horizon_day = 420;  // evaluation horizon = start + horizon_day
  std::uint64_t rng_seed = 1;

  TrainConfig train;   // knobs for the adaptive-weight methods
  PathOptions paths;

  void validate() const;  // throws std::invalid_argument
};

// key=value file with the same field names (dates as YYYY-MM-DD; training
// knobs under train_*, path knobs under path_*). Unknown keys are errors.
PlantedConfig load_planted_config(const std::string& path);

struct PlantedTruth {
  std::map<std::string, Date> infected;  // firm key -> infection date
  std::set<std::string> conductive;      // rel type names
};

struct PlantedData {
  HinStore store;
  std::vector<NewsEvent> events;  // sorted by (date, firm)
  PlantedTruth truth;
};

inline constexpr const char* kPlantedCategory = "planted";

// Deterministic given config.rng_seed. Degenerate configurations (dead
// diffusion, seeds without conductive relations) still generate, with
// warnings.
PlantedData generate_hin(const PlantedConfig& config, std::vector<std::string>* warnings = nullptr);

enum class BenchMethod { LpFixed, LpCoreRelation, LpPath, LpPathSegment };

const char* bench_method_name(BenchMethod method);
// Accepts canonical names plus the short aliases lp-relation and lp-segment.
std::optional<BenchMethod> parse_bench_method(std::string_view name);
std::vector<BenchMethod> parse_bench_methods(std::string_view csv);  // throws on unknown entry

struct MethodSummary {
  BenchMethod method = BenchMethod::LpFixed;
  std::size_t seeds_ok = 0;
  double auc_roc_mean = 0.0;
  double auc_roc_sd = 0.0;
  double auc_pr_mean = 0.0;
  double auc_pr_sd = 0.0;
  double saturation_mean = 0.0;  // fraction of weights in [0,0.1] u [0.9,1]
  std::vector<double> per_seed_auc_roc;
  std::vector<double> per_seed_auc_pr;
  std::vector<double> per_seed_saturation;
};

struct BenchReport {
  std::vector<MethodSummary> methods;   // caller's method order
  std::vector<std::string> failures;    // "seed N[ method]: message"
  std::size_t seeds_requested = 0;

  // TSV with a header row, fixed 6-decimal formatting; byte-stable across
  // reruns with the same config and seeds.
  std::string table() const;
};

// Full pipeline per seed: generate -> core -> split -> features -> train ->
// predict -> evaluate. Requires >= 2 seeds and >= 1 method; per-seed stage
// failures are recorded and excluded from the means.
BenchReport run_benchmark(const PlantedConfig& config, const std::vector<BenchMethod>& methods,
                          const std::vector<std::uint64_t>& seeds, int threads = 1);

}  // namespace hinscreen
