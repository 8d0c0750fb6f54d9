#include <doctest.h>

#include <algorithm>
#include <set>

#include "hinscreen/core_network.hpp"
#include "hinscreen/label_store.hpp"
#include "test_util.hpp"

using namespace hinscreen;
using testutil::TempDir;
using testutil::write_file;

TEST_CASE("parallel relations in both directions form one edge with the union of types") {
  HinStore store = testutil::make_store({{"a", "supplier", "b"}, {"b", "customer", "a"}});
  auto result = build_core(store, {"a", "b"});
  REQUIRE(result.graph.edge_count() == 1);
  const CoreEdge& e = result.graph.edge(0);
  std::set<std::string> rels;
  for (auto r : e.rel_types) rels.insert(result.graph.rel_catalog()[r]);
  CHECK(rels == std::set<std::string>{"customer", "supplier"});
  CHECK(result.isolated.empty());
}

TEST_CASE("relations leaving the universe leave its members isolated") {
  HinStore store = testutil::make_store({{"a", "supplier", "x"}});
  auto result = build_core(store, {"a", "b", "c"});
  CHECK(result.graph.node_count() == 0);
  CHECK(result.graph.edge_count() == 0);
  CHECK(result.isolated == std::vector<std::string>{"a", "b", "c"});
}

TEST_CASE("empty universe is rejected") {
  HinStore store = testutil::make_store({{"a", "supplier", "b"}});
  CHECK_THROWS_AS(build_core(store, {}), std::invalid_argument);
}

TEST_CASE("universe keys missing from the store count as isolated") {
  HinStore store = testutil::make_store({{"a", "supplier", "b"}});
  auto result = build_core(store, {"a", "b", "ghost"});
  CHECK(result.graph.node_count() == 2);
  CHECK(result.isolated == std::vector<std::string>{"ghost"});
}

TEST_CASE("neighbors are symmetric and sized as expected") {
  SUBCASE("path graph") {
    auto g = testutil::make_graph({{"a", "r", "b"}, {"b", "r", "c"}});
    const NodeIndex b = *g.core.find_node("b");
    std::set<std::string> nbrs;
    for (auto [v, e] : g.core.neighbors(b)) nbrs.insert(g.core.node_key(v));
    CHECK(nbrs == std::set<std::string>{"a", "c"});
  }
  SUBCASE("star") {
    auto g = testutil::make_graph(
        {{"s", "r", "l1"}, {"s", "r", "l2"}, {"s", "r", "l3"}, {"s", "r", "l4"}});
    CHECK(g.core.degree(*g.core.find_node("s")) == 4);
    for (const char* leaf : {"l1", "l2", "l3", "l4"}) {
      CHECK(g.core.degree(*g.core.find_node(leaf)) == 1);
    }
  }
  SUBCASE("symmetry and degree sum on a small graph") {
    auto g = testutil::make_graph(
        {{"a", "r", "b"}, {"b", "r", "c"}, {"c", "r", "a"}, {"c", "r", "d"}});
    std::size_t degree_sum = 0;
    for (NodeIndex v = 0; v < g.core.node_count(); ++v) {
      degree_sum += g.core.degree(v);
      CHECK(g.core.degree(v) >= 1);
      for (auto [u, e] : g.core.neighbors(v)) {
        auto back = g.core.neighbors(u);
        CHECK(std::any_of(back.begin(), back.end(), [&](auto p) { return p.first == v; }));
      }
    }
    CHECK(degree_sum == 2 * g.core.edge_count());
  }
}

TEST_CASE("core construction is independent of store insertion order") {
  TempDir dir;
  HinStore forward = testutil::make_store(
      {{"a", "r1", "b"}, {"b", "r2", "c"}, {"c", "r1", "d"}, {"d", "r2", "a"}});
  HinStore backward = testutil::make_store(
      {{"d", "r2", "a"}, {"c", "r1", "d"}, {"b", "r2", "c"}, {"a", "r1", "b"}});
  std::vector<std::string> universe{"a", "b", "c", "d"};
  auto g1 = build_core(forward, universe).graph;
  auto g2 = build_core(backward, universe).graph;
  CHECK(g1.digest() == g2.digest());
  g1.save(dir.file("g1"));
  g2.save(dir.file("g2"));
  CHECK(testutil::slurp(dir.file("g1")) == testutil::slurp(dir.file("g2")));
}

TEST_CASE("core graph save and load round-trips") {
  TempDir dir;
  auto g = testutil::make_graph({{"a", "r1", "b"}, {"b", "r2", "c"}});
  g.core.save(dir.file("core"));
  CoreGraph loaded = CoreGraph::load(dir.file("core"));
  CHECK(loaded.digest() == g.core.digest());
  CHECK(loaded.node_count() == g.core.node_count());
  CHECK(loaded.edge_count() == g.core.edge_count());
  CHECK(loaded.rel_catalog() == g.core.rel_catalog());
}

TEST_CASE("node list files accept comments and blank lines") {
  TempDir dir;
  write_file(dir.file("universe.txt"), "# header\na\n\nb\n");
  CHECK(load_node_list(dir.file("universe.txt")) == std::vector<std::string>{"a", "b"});
}

namespace {

NewsEvent ev(const char* date, const char* firm, const char* cat = "planted") {
  return NewsEvent{*Date::parse(date), firm, cat};
}

}  // namespace

TEST_CASE("build_lists keeps the min and max date per firm and category") {
  std::vector<NewsEvent> events{ev("2015-07-09", "f"), ev("2013-02-01", "f"),
                                ev("2014-01-01", "g")};
  auto lists = build_lists(events);
  REQUIRE(lists.count("planted") == 1);
  const CategoryList& list = lists.at("planted");
  CHECK(list.entries.at("f").first.to_string() == "2013-02-01");
  CHECK(list.entries.at("f").second.to_string() == "2015-07-09");
  CHECK(list.entries.at("g").first == list.entries.at("g").second);
}

TEST_CASE("event loading validates against the category catalog") {
  TempDir dir;
  write_file(dir.file("events.tsv"),
             "2015-01-01\tf1\tProduct/Service\n"
             "2015-01-02\tf2\tNotACategory\n"
             "bad-date\tf3\tProduct/Service\n");
  auto result = load_events(dir.file("events.tsv"), {"Product/Service"});
  CHECK(result.events.size() == 1);
  CHECK(result.record_errors.size() == 2);

  // An empty catalog accepts any tag.
  auto open = load_events(dir.file("events.tsv"), {});
  CHECK(open.events.size() == 2);
}

TEST_CASE("the default category catalog has 17 tags") {
  CHECK(default_category_catalog().size() == 17);
}

TEST_CASE("source/target split follows the first-event window convention") {
  CategoryList list;
  list.category = "planted";
  auto add = [&](const char* firm, const char* first) {
    list.entries[firm] = {*Date::parse(first), *Date::parse(first)};
  };
  add("in_window", "2017-01-15");
  add("old", "2016-01-01");
  add("future", "2017-03-01");
  add("boundary_low", "2017-01-01");   // exactly cutoff - delta: source
  add("boundary_low_next", "2017-01-02");  // first day inside the window
  add("boundary_high", "2017-02-01");  // exactly the cutoff: target

  SplitSpec spec{*Date::parse("2017-02-01"), 31, *Date::parse("2018-05-31")};
  auto [sources, targets] = split_source_target(list, spec);
  CHECK(targets == std::set<std::string>{"in_window", "boundary_low_next", "boundary_high"});
  CHECK(sources == std::set<std::string>{"old", "boundary_low"});

  std::set<std::string> both;
  std::set_intersection(sources.begin(), sources.end(), targets.begin(), targets.end(),
                        std::inserter(both, both.begin()));
  CHECK(both.empty());
}

TEST_CASE("shifting the cutoff earlier never moves a firm from target to source") {
  CategoryList list;
  list.category = "planted";
  list.entries["f"] = {*Date::parse("2017-01-15"), *Date::parse("2017-01-15")};
  const Date horizon = *Date::parse("2018-05-31");
  bool was_source = false;
  for (int day = 0; day < 120; ++day) {
    SplitSpec spec{Date::from_ymd(2017, 1, 1).plus_days(day), 31, horizon};
    auto [sources, targets] = split_source_target(list, spec);
    if (targets.count("f")) {
      CHECK(!was_source);  // target phase must precede the source phase
    }
    was_source = was_source || sources.count("f") > 0;
  }
  CHECK(was_source);
}

TEST_CASE("prediction targets exclude prior-event firms and label the horizon window") {
  CategoryList list;
  list.category = "planted";
  auto add = [&](const char* firm, const char* first) {
    list.entries[firm] = {*Date::parse(first), *Date::parse(first)};
  };
  add("prior", "2016-06-01");
  add("on_cutoff", "2017-02-01");
  add("hit", "2017-06-01");
  add("at_horizon", "2018-05-31");
  add("too_late", "2018-06-01");

  std::set<std::string> universe{"prior", "on_cutoff", "hit", "at_horizon", "too_late", "quiet"};
  SplitSpec spec{*Date::parse("2017-02-01"), 31, *Date::parse("2018-05-31")};
  auto sets = prediction_targets(list, universe, spec);

  CHECK(sets.candidates == std::set<std::string>{"hit", "at_horizon", "too_late", "quiet"});
  CHECK(sets.positives == std::set<std::string>{"hit", "at_horizon"});
  CHECK(std::includes(sets.candidates.begin(), sets.candidates.end(), sets.positives.begin(),
                      sets.positives.end()));

  // Candidates never intersect the source/target sets of the same spec.
  auto [sources, targets] = split_source_target(list, spec);
  for (const auto& c : sets.candidates) {
    CHECK(!sources.count(c));
    CHECK(!targets.count(c));
  }
}

TEST_CASE("sparse categories widen the target window") {
  CategoryList sparse;
  sparse.category = "thin";
  sparse.entries["f1"] = {*Date::parse("2015-01-01"), *Date::parse("2015-01-01")};
  const Date cutoff = *Date::parse("2017-02-01");
  CHECK(resolve_delta(sparse, cutoff, 31, 182, 500) == 182);
  CHECK(resolve_delta(sparse, cutoff, 31, 182, 1) == 31);  // floor met: keep the base window
}

TEST_CASE("category splits round-trip through their file form") {
  TempDir dir;
  CategorySplit split;
  split.category = "planted";
  split.spec = SplitSpec{*Date::parse("2017-02-01"), 31, *Date::parse("2018-05-31")};
  split.sources = {"s1", "s2"};
  split.targets = {"t1"};
  split.candidates = {{"c1", 0}, {"c2", 1}};
  save_split(dir.file("split.tsv"), split);
  CategorySplit loaded = load_split(dir.file("split.tsv"));
  CHECK(loaded.category == split.category);
  CHECK(loaded.spec.cutoff == split.spec.cutoff);
  CHECK(loaded.spec.delta_days == split.spec.delta_days);
  CHECK(loaded.spec.horizon_end == split.spec.horizon_end);
  CHECK(loaded.sources == split.sources);
  CHECK(loaded.targets == split.targets);
  CHECK(loaded.candidates == split.candidates);
}
