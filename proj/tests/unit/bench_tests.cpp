#include <doctest.h>

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "hinscreen/synthetic_bench.hpp"
#include "test_util.hpp"

using namespace hinscreen;

namespace {

// Small enough to generate in milliseconds, still structurally interesting.
PlantedConfig gen_config() {
  PlantedConfig c;
  c.n_firms = 80;
  c.n_aux = 20;
  c.n_rel_types = 6;
  c.n_conductive = 2;
  c.edge_density = 0.4;
  c.aux_density = 0.4;
  c.diffusion_prob = 0.5;
  c.n_seed_firms = 8;
  c.rounds = 10;
  c.round_days = 14;
  return c;
}

// Windows rescaled so sources, targets, and positives all land inside the
// reach of a 150-firm diffusion.
PlantedConfig small_bench_config() {
  PlantedConfig c;
  c.n_firms = 150;
  c.n_aux = 40;
  c.n_rel_types = 6;
  c.n_conductive = 2;
  c.edge_density = 0.75;
  c.aux_density = 0.4;
  c.diffusion_prob = 0.5;
  c.n_seed_firms = 10;
  c.rounds = 20;
  c.round_days = 14;
  c.cutoff_day = 94;
  c.delta_days = 31;
  c.horizon_day = 200;
  c.train.epochs = 15;
  c.train.learning_rate = 0.1;
  c.train.hidden_dim = 8;
  c.train.max_iter = 40;
  return c;
}

struct Dsu {
  std::vector<std::size_t> parent;
  explicit Dsu(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) { return parent[x] == x ? x : parent[x] = find(parent[x]); }
  void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

}  // namespace

TEST_CASE("generation is deterministic and emits sorted events") {
  PlantedConfig c = gen_config();
  PlantedData a = generate_hin(c);
  PlantedData b = generate_hin(c);

  CHECK(a.truth.infected == b.truth.infected);
  CHECK(a.truth.conductive == b.truth.conductive);
  REQUIRE(a.events.size() == b.events.size());
  for (std::size_t i = 0; i < a.events.size(); ++i) {
    CHECK(a.events[i].date == b.events[i].date);
    CHECK(a.events[i].firm == b.events[i].firm);
    CHECK(a.events[i].category == kPlantedCategory);
    if (i > 0) {
      const bool ordered = a.events[i - 1].date < a.events[i].date ||
                           (a.events[i - 1].date == a.events[i].date &&
                            a.events[i - 1].firm < a.events[i].firm);
      CHECK(ordered);
    }
  }

  testutil::TempDir dir;
  a.store.save(dir.file("a.tsv"));
  b.store.save(dir.file("b.tsv"));
  CHECK(testutil::slurp(dir.file("a.tsv")) == testutil::slurp(dir.file("b.tsv")));

  SUBCASE("events and infection truth agree one-to-one") {
    CHECK(a.events.size() == a.truth.infected.size());
    for (const NewsEvent& ev : a.events) {
      auto it = a.truth.infected.find(ev.firm);
      REQUIRE(it != a.truth.infected.end());
      CHECK(it->second == ev.date);
    }
  }
  SUBCASE("auxiliary nodes cycle through the non-firm kinds") {
    auto kind_of = [&](const std::string& key) {
      auto id = a.store.find_entity(key);
      REQUIRE(id.has_value());
      return a.store.entity(*id).kind;
    };
    CHECK(kind_of("A01") == NodeKind::Person);
    CHECK(kind_of("A02") == NodeKind::Location);
    CHECK(kind_of("A03") == NodeKind::Goods);
    CHECK(kind_of("A04") == NodeKind::Page);
    CHECK(kind_of("F01") == NodeKind::Firm);
  }
  SUBCASE("a different generator seed moves the events") {
    PlantedConfig other = c;
    other.rng_seed = 99;
    PlantedData d = generate_hin(other);
    CHECK(d.truth.infected != a.truth.infected);
  }
}

TEST_CASE("dead diffusion leaves exactly the seed firms infected") {
  PlantedConfig c = gen_config();
  c.diffusion_prob = 0.0;
  std::vector<std::string> warnings;
  PlantedData data = generate_hin(c, &warnings);
  CHECK(data.events.size() == c.n_seed_firms);
  for (const NewsEvent& ev : data.events) CHECK(ev.date == c.start);
  bool warned = false;
  for (const std::string& w : warnings) {
    if (w.find("no infections beyond") != std::string::npos) warned = true;
  }
  CHECK(warned);
}

TEST_CASE("certain diffusion infects whole conductive components") {
  PlantedConfig c;
  c.n_firms = 60;
  c.n_aux = 0;
  c.n_rel_types = 4;
  c.n_conductive = 3;
  c.edge_density = 0.5;
  c.diffusion_prob = 1.0;
  c.n_seed_firms = 6;
  c.rounds = 70;  // more rounds than any component diameter
  c.round_days = 1;
  c.cutoff_day = 240;
  c.horizon_day = 420;
  PlantedData data = generate_hin(c);

  Dsu dsu(data.store.entity_count());
  for (const Relation& rel : data.store.relations()) {
    if (!data.truth.conductive.count(data.store.rel_type_name(rel.rel_type))) continue;
    dsu.unite(rel.src, rel.dst);
  }
  std::set<std::size_t> seed_roots;
  for (const NewsEvent& ev : data.events) {
    if (ev.date == c.start) {
      seed_roots.insert(dsu.find(*data.store.find_entity(ev.firm)));
    }
  }
  REQUIRE(!seed_roots.empty());
  for (std::size_t i = 0; i < data.store.entity_count(); ++i) {
    const Entity& ent = data.store.entity(static_cast<EntityIndex>(i));
    if (ent.kind != NodeKind::Firm) continue;
    const bool reachable = seed_roots.count(dsu.find(i)) > 0;
    CHECK(data.truth.infected.count(ent.key) == (reachable ? 1u : 0u));
  }
}

TEST_CASE("method names parse with their aliases") {
  CHECK(parse_bench_method("lp-fixed") == BenchMethod::LpFixed);
  CHECK(parse_bench_method("lp-core-relation") == BenchMethod::LpCoreRelation);
  CHECK(parse_bench_method("lp-relation") == BenchMethod::LpCoreRelation);
  CHECK(parse_bench_method("lp-path") == BenchMethod::LpPath);
  CHECK(parse_bench_method("lp-path-segment") == BenchMethod::LpPathSegment);
  CHECK(parse_bench_method("lp-segment") == BenchMethod::LpPathSegment);
  CHECK(!parse_bench_method("lp-magic").has_value());

  for (BenchMethod m : {BenchMethod::LpFixed, BenchMethod::LpCoreRelation, BenchMethod::LpPath,
                        BenchMethod::LpPathSegment}) {
    CHECK(parse_bench_method(bench_method_name(m)) == m);
  }

  SUBCASE("comma lists") {
    auto methods = parse_bench_methods("lp-fixed,lp-segment");
    REQUIRE(methods.size() == 2);
    CHECK(methods[0] == BenchMethod::LpFixed);
    CHECK(methods[1] == BenchMethod::LpPathSegment);
    CHECK(parse_bench_methods("lp-fixed,,").size() == 1);
    CHECK_THROWS_WITH_AS(parse_bench_methods("lp-fixed,bogus"),
                         doctest::Contains("bogus"), std::invalid_argument);
    CHECK_THROWS_AS(parse_bench_methods(""), std::invalid_argument);
  }
}

TEST_CASE("planted configuration validation") {
  PlantedConfig c = gen_config();
  CHECK_NOTHROW(c.validate());
  auto expect_invalid = [](PlantedConfig bad) {
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  };
  { PlantedConfig bad = c; bad.n_firms = 1; expect_invalid(bad); }
  { PlantedConfig bad = c; bad.n_rel_types = 1; bad.n_conductive = 0; expect_invalid(bad); }
  { PlantedConfig bad = c; bad.n_conductive = 0; expect_invalid(bad); }
  { PlantedConfig bad = c; bad.n_conductive = bad.n_rel_types; expect_invalid(bad); }
  { PlantedConfig bad = c; bad.edge_density = -0.1; expect_invalid(bad); }
  { PlantedConfig bad = c; bad.diffusion_prob = 1.5; expect_invalid(bad); }
  { PlantedConfig bad = c; bad.n_seed_firms = 0; expect_invalid(bad); }
  { PlantedConfig bad = c; bad.n_seed_firms = bad.n_firms + 1; expect_invalid(bad); }
  { PlantedConfig bad = c; bad.rounds = 0; expect_invalid(bad); }
  { PlantedConfig bad = c; bad.round_days = 0; expect_invalid(bad); }
  { PlantedConfig bad = c; bad.horizon_day = bad.cutoff_day; expect_invalid(bad); }
  { PlantedConfig bad = c; bad.cutoff_day = 0; expect_invalid(bad); }
  { PlantedConfig bad = c; bad.delta_days = 0; expect_invalid(bad); }
  { PlantedConfig bad = c; bad.paths.max_len = 5; expect_invalid(bad); }
  { PlantedConfig bad = c; bad.train.learning_rate = -1.0; expect_invalid(bad); }
}

TEST_CASE("planted configuration files") {
  testutil::TempDir dir;
  SUBCASE("every field parses") {
    const std::string path = dir.file("bench.cfg");
    testutil::write_file(path,
                         "# scaled-down benchmark\n"
                         "n_firms=150\n"
                         "n_aux=40\n"
                         "n_rel_types=6\n"
                         "n_conductive=2\n"
                         "edge_density=0.75\n"
                         "aux_density=0.4\n"
                         "diffusion_prob=0.5\n"
                         "n_seed_firms=10\n"
                         "rounds=20\n"
                         "round_days=14\n"
                         "start=2016-03-01\n"
                         "cutoff_day=94\n"
                         "delta_days=31\n"
                         "horizon_day=200\n"
                         "seed=17\n"
                         "train_learning_rate=0.2\n"
                         "train_epochs=25\n"
                         "train_tol=0.0001\n"
                         "train_max_iter=50\n"
                         "train_hidden_dim=12\n"
                         "train_activation=tanh\n"
                         "path_max_len=3\n"
                         "path_top_k=500\n"
                         "path_expansion_cap=2000\n");
    PlantedConfig c = load_planted_config(path);
    CHECK(c.n_firms == 150);
    CHECK(c.n_aux == 40);
    CHECK(c.n_conductive == 2);
    CHECK(c.edge_density == 0.75);
    CHECK(c.diffusion_prob == 0.5);
    CHECK(c.start == Date::from_ymd(2016, 3, 1));
    CHECK(c.cutoff_day == 94);
    CHECK(c.horizon_day == 200);
    CHECK(c.rng_seed == 17);
    CHECK(c.train.learning_rate == 0.2);
    CHECK(c.train.epochs == 25);
    CHECK(c.train.hidden_dim == 12);
    CHECK(c.train.hidden_activation == "tanh");
    CHECK(c.paths.max_len == 3);
    CHECK(c.paths.top_k == 500);
    CHECK(c.paths.expansion_cap == 2000);
  }
  SUBCASE("unknown keys and malformed lines name the location") {
    const std::string path = dir.file("bad.cfg");
    testutil::write_file(path, "n_firms=100\nn_frims=100\n");
    CHECK_THROWS_WITH_AS(load_planted_config(path), doctest::Contains(":2:"),
                         std::runtime_error);
    testutil::write_file(path, "n_firms:100\n");
    CHECK_THROWS_AS(load_planted_config(path), std::runtime_error);
    testutil::write_file(path, "n_firms=lots\n");
    CHECK_THROWS_AS(load_planted_config(path), std::runtime_error);
  }
  SUBCASE("loaded values still pass validation") {
    const std::string path = dir.file("invalid.cfg");
    testutil::write_file(path, "n_rel_types=5\nn_conductive=5\n");
    CHECK_THROWS_AS(load_planted_config(path), std::invalid_argument);
  }
}

TEST_CASE("benchmark pipeline over a small planted configuration") {
  PlantedConfig c = small_bench_config();
  const std::vector<BenchMethod> methods{BenchMethod::LpFixed, BenchMethod::LpCoreRelation};
  const std::vector<std::uint64_t> seeds{1, 2};
  BenchReport report = run_benchmark(c, methods, seeds);

  REQUIRE(report.methods.size() == 2);
  CHECK(report.methods[0].method == BenchMethod::LpFixed);
  CHECK(report.methods[1].method == BenchMethod::LpCoreRelation);
  CHECK(report.seeds_requested == 2);
  CHECK(report.failures.empty());

  for (const MethodSummary& m : report.methods) {
    CHECK(m.seeds_ok == 2);
    REQUIRE(m.per_seed_auc_roc.size() == 2);
    REQUIRE(m.per_seed_auc_pr.size() == 2);
    REQUIRE(m.per_seed_saturation.size() == 2);
    for (double v : m.per_seed_auc_roc) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
    CHECK(m.auc_roc_mean ==
          doctest::Approx((m.per_seed_auc_roc[0] + m.per_seed_auc_roc[1]) / 2.0)
              .epsilon(1e-15));
  }
  // Fixed unit weights are all 1, hence fully saturated by definition.
  CHECK(report.methods[0].saturation_mean == 1.0);

  SUBCASE("the rendered table is byte-stable across reruns") {
    BenchReport again = run_benchmark(c, methods, seeds);
    CHECK(report.table() == again.table());
    const std::string table = report.table();
    CHECK(table.find("method\tseeds_ok\t") == 0);
    CHECK(table.find("lp-fixed\t2\t") != std::string::npos);
    CHECK(table.find("lp-core-relation\t2\t") != std::string::npos);
    CHECK(std::count(table.begin(), table.end(), '\n') == 3);
  }
}

TEST_CASE("benchmark seeds that cannot produce labels are recorded as failures") {
  PlantedConfig c = small_bench_config();
  c.diffusion_prob = 0.0;  // only round-0 seeds, so the target window is empty
  BenchReport report = run_benchmark(c, {BenchMethod::LpFixed}, {1, 2});
  CHECK(report.methods[0].seeds_ok == 0);
  CHECK(report.failures.size() == 2);
  for (const std::string& f : report.failures) {
    CHECK(f.find("seed ") == 0);
  }
  CHECK(report.methods[0].auc_roc_mean == 0.0);
  CHECK(report.table().find("lp-fixed\t0\t") != std::string::npos);
}

TEST_CASE("benchmark argument validation") {
  PlantedConfig c = small_bench_config();
  CHECK_THROWS_AS(run_benchmark(c, {}, {1, 2}), std::invalid_argument);
  CHECK_THROWS_AS(run_benchmark(c, {BenchMethod::LpFixed}, {1}), std::invalid_argument);
}
