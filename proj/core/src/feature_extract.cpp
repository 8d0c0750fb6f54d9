#include "hinscreen/feature_extract.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>
#include <unordered_set>

#include "hinscreen/parallel.hpp"
#include "hinscreen/tsv.hpp"

namespace hinscreen {

namespace {

// Rel type indices are insertion-ordered, so every ordering decision goes
// through a name-rank table to stay independent of input file order.
std::vector<std::uint32_t> name_ranks(const HinStore& store) {
  std::vector<std::uint32_t> order(store.rel_type_count());
  for (std::uint32_t r = 0; r < order.size(); ++r) order[r] = r;
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    return store.rel_type_name(a) < store.rel_type_name(b);
  });
  std::vector<std::uint32_t> rank(order.size());
  for (std::uint32_t pos = 0; pos < order.size(); ++pos) rank[order[pos]] = pos;
  return rank;
}

struct RankLess {
  const std::vector<std::uint32_t>* rank;
  bool operator()(const PathSignature& x, const PathSignature& y) const {
    const std::size_t n = std::min(x.length, y.length);
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint32_t rx = (*rank)[x.rels[i]], ry = (*rank)[y.rels[i]];
      if (rx != ry) return rx < ry;
    }
    return x.length < y.length;
  }
};

PathSignature canonicalize(const PathSignature& sig, const std::vector<std::uint32_t>& rank) {
  PathSignature rev;
  rev.length = sig.length;
  for (std::uint8_t i = 0; i < sig.length; ++i) rev.rels[i] = sig.rels[sig.length - 1 - i];
  RankLess less{&rank};
  return less(rev, sig) ? rev : sig;
}

using IncidentSpan = std::span<const std::pair<EntityIndex, RelTypeIndex>>;

// Subrange of u's incidence covering neighbor v.
IncidentSpan rels_toward(IncidentSpan incident, EntityIndex v) {
  auto lo = std::lower_bound(incident.begin(), incident.end(),
                             std::make_pair(v, RelTypeIndex{0}));
  std::size_t count = 0;
  for (auto hi = lo; hi != incident.end() && hi->first == v; ++hi) ++count;
  if (count == 0) return {};
  return incident.subspan(static_cast<std::size_t>(lo - incident.begin()), count);
}

struct PairEnumerator {
  const HinStore& store;
  const std::vector<std::uint32_t>& rank;
  std::size_t cap;  // 0 = unlimited
  int max_len;

  bool capped(EntityIndex u) const {
    return cap != 0 && store.incident_degree(u) > cap;
  }

  std::vector<PathSignature> run(EntityIndex i, EntityIndex j) const {
    std::set<PathSignature, RankLess> found{RankLess{&rank}};
    std::unordered_set<EntityIndex> blocked;  // intermediates of retained shorter paths

    const IncidentSpan inc_i = store.incident(i);
    const IncidentSpan inc_j = store.incident(j);

    // Length 1: direct relations.
    for (const auto& [nb, rel] : rels_toward(inc_i, j)) {
      PathSignature sig;
      sig.length = 1;
      sig.rels[0] = rel;
      found.insert(sig);
    }

    // Length 2: i - c - j. Length-1 paths have no intermediates, so no
    // pruning applies at this level.
    if (max_len >= 2) {
      std::vector<EntityIndex> level_intermediates;
      for (auto it = inc_i.begin(); it != inc_i.end();) {
        const EntityIndex c = it->first;
        auto rels_ic_begin = it;
        while (it != inc_i.end() && it->first == c) ++it;
        if (c == j || capped(c)) continue;
        IncidentSpan rels_cj = rels_toward(store.incident(c), j);
        if (rels_cj.empty()) continue;
        for (auto r1 = rels_ic_begin; r1 != it; ++r1) {
          for (const auto& [nb2, r2] : rels_cj) {
            PathSignature sig;
            sig.length = 2;
            sig.rels[0] = r1->second;
            sig.rels[1] = r2;
            found.insert(canonicalize(sig, rank));
          }
        }
        level_intermediates.push_back(c);
      }
      blocked.insert(level_intermediates.begin(), level_intermediates.end());
    }

    // Length 3: i - a - b - j with a, b off the blocked set. Intermediates
    // join the blocked set only after the whole level is enumerated.
    if (max_len >= 3) {
      std::vector<EntityIndex> level_intermediates;
      for (auto ita = inc_i.begin(); ita != inc_i.end();) {
        const EntityIndex a = ita->first;
        auto rels_ia_begin = ita;
        while (ita != inc_i.end() && ita->first == a) ++ita;
        if (a == j || blocked.count(a) || capped(a)) continue;
        const IncidentSpan inc_a = store.incident(a);
        for (auto itb = inc_j.begin(); itb != inc_j.end();) {
          const EntityIndex b = itb->first;
          auto rels_jb_begin = itb;
          while (itb != inc_j.end() && itb->first == b) ++itb;
          if (b == i || b == a || blocked.count(b) || capped(b)) continue;
          IncidentSpan rels_ab = rels_toward(inc_a, b);
          if (rels_ab.empty()) continue;
          for (auto r1 = rels_ia_begin; r1 != ita; ++r1) {
            for (const auto& [nb2, r2] : rels_ab) {
              for (auto r3 = rels_jb_begin; r3 != itb; ++r3) {
                PathSignature sig;
                sig.length = 3;
                sig.rels[0] = r1->second;
                sig.rels[1] = r2;
                sig.rels[2] = r3->second;
                found.insert(canonicalize(sig, rank));
              }
            }
          }
          level_intermediates.push_back(a);
          level_intermediates.push_back(b);
        }
      }
      blocked.insert(level_intermediates.begin(), level_intermediates.end());
    }

    // Length 4: i - a - b - c - j, b found by intersecting the incidence
    // lists of a and c.
    if (max_len >= 4) {
      for (auto ita = inc_i.begin(); ita != inc_i.end();) {
        const EntityIndex a = ita->first;
        auto rels_ia_begin = ita;
        while (ita != inc_i.end() && ita->first == a) ++ita;
        if (a == j || blocked.count(a) || capped(a)) continue;
        const IncidentSpan inc_a = store.incident(a);
        for (auto itc = inc_j.begin(); itc != inc_j.end();) {
          const EntityIndex c = itc->first;
          auto rels_jc_begin = itc;
          while (itc != inc_j.end() && itc->first == c) ++itc;
          if (c == i || c == a || blocked.count(c) || capped(c)) continue;
          const IncidentSpan inc_c = store.incident(c);
          // March the two sorted incidence lists for common neighbors b.
          auto pa = inc_a.begin();
          auto pc = inc_c.begin();
          while (pa != inc_a.end() && pc != inc_c.end()) {
            if (pa->first < pc->first) {
              ++pa;
              continue;
            }
            if (pc->first < pa->first) {
              ++pc;
              continue;
            }
            const EntityIndex b = pa->first;
            auto rels_ab_begin = pa;
            while (pa != inc_a.end() && pa->first == b) ++pa;
            auto rels_cb_begin = pc;
            while (pc != inc_c.end() && pc->first == b) ++pc;
            if (b == i || b == j || b == a || b == c || blocked.count(b) || capped(b)) continue;
            for (auto r1 = rels_ia_begin; r1 != ita; ++r1) {
              for (auto r2 = rels_ab_begin; r2 != pa && r2->first == b; ++r2) {
                for (auto r3 = rels_cb_begin; r3 != pc && r3->first == b; ++r3) {
                  for (auto r4 = rels_jc_begin; r4 != itc; ++r4) {
                    PathSignature sig;
                    sig.length = 4;
                    sig.rels[0] = r1->second;
                    sig.rels[1] = r2->second;
                    sig.rels[2] = r3->second;
                    sig.rels[3] = r4->second;
                    found.insert(canonicalize(sig, rank));
                  }
                }
              }
            }
          }
        }
      }
    }

    return {found.begin(), found.end()};
  }
};

std::vector<std::uint32_t> sorted_unique(std::vector<std::uint32_t> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

}  // namespace

std::string_view to_string(FeatureScheme scheme) {
  switch (scheme) {
    case FeatureScheme::CoreRelation: return "relation";
    case FeatureScheme::Path: return "path";
    case FeatureScheme::PathSegment: return "segment";
  }
  return "relation";
}

std::optional<FeatureScheme> parse_feature_scheme(std::string_view text) {
  if (text == "relation") return FeatureScheme::CoreRelation;
  if (text == "path") return FeatureScheme::Path;
  if (text == "segment") return FeatureScheme::PathSegment;
  return std::nullopt;
}

std::vector<PathSignature> enumerate_paths(const HinStore& store, std::string_view from_key,
                                           std::string_view to_key, const PathOptions& options) {
  auto i = store.find_entity(from_key);
  auto j = store.find_entity(to_key);
  if (!i || !j) throw std::invalid_argument("unknown path endpoint");
  if (*i == *j) throw std::invalid_argument("path endpoints must differ");
  if (options.max_len > 4 || options.max_len < 1) {
    throw std::invalid_argument("max_len must lie in [1,4]");
  }
  store.build_adjacency();
  auto rank = name_ranks(store);
  PairEnumerator enumerator{store, rank, options.expansion_cap, options.max_len};
  return enumerator.run(*i, *j);
}

std::vector<std::vector<PathSignature>> collect_edge_paths(const HinStore& store,
                                                           const CoreGraph& core,
                                                           const PathOptions& options) {
  if (options.max_len > 4 || options.max_len < 1) {
    throw std::invalid_argument("max_len must lie in [1,4]");
  }
  store.build_adjacency();
  const auto rank = name_ranks(store);

  // Core nodes must exist in the store; build_core guarantees this when the
  // store is the one the core was built from.
  std::vector<EntityIndex> store_id(core.node_count());
  for (NodeIndex v = 0; v < core.node_count(); ++v) {
    auto id = store.find_entity(core.node_key(v));
    if (!id) throw std::invalid_argument("core node missing from store: " + core.node_key(v));
    store_id[v] = *id;
  }

  PairEnumerator enumerator{store, rank, options.expansion_cap, options.max_len};
  std::vector<std::vector<PathSignature>> per_edge(core.edge_count());
  parallel_for(core.edge_count(), options.threads, [&](std::size_t e) {
    const CoreEdge& edge = core.edge(static_cast<EdgeIndex>(e));
    per_edge[e] = enumerator.run(store_id[edge.a], store_id[edge.b]);
  });
  return per_edge;
}

std::string signature_name(const HinStore& store, const PathSignature& sig) {
  std::string out;
  for (std::uint8_t i = 0; i < sig.length; ++i) {
    if (i > 0) out.push_back('|');
    out += store.rel_type_name(sig.rels[i]);
  }
  return out;
}

std::vector<PathSignature> select_top_paths(
    const HinStore& store, const std::vector<std::vector<PathSignature>>& per_edge,
    std::size_t k) {
  if (k == 0) throw std::invalid_argument("top-k must be positive");
  const auto rank = name_ranks(store);
  std::map<PathSignature, std::size_t, RankLess> counts{RankLess{&rank}};
  for (const auto& sigs : per_edge) {
    for (const PathSignature& sig : sigs) ++counts[sig];  // sigs are unique per edge
  }
  std::vector<std::pair<PathSignature, std::size_t>> items(counts.begin(), counts.end());
  RankLess less{&rank};
  std::stable_sort(items.begin(), items.end(), [&](const auto& x, const auto& y) {
    if (x.second != y.second) return x.second > y.second;
    return less(x.first, y.first);
  });
  if (items.size() > k) items.resize(k);
  std::vector<PathSignature> vocab;
  vocab.reserve(items.size());
  for (auto& [sig, count] : items) vocab.push_back(sig);
  return vocab;
}

std::string segment_of(int position, int length) {
  if (length < 1 || length > 4 || position < 1 || position > length) {
    throw std::invalid_argument("segment_of: need 1 <= position <= length <= 4");
  }
  switch (length) {
    case 1: return "1";
    case 2: return "2";
    case 3: return (position == 2) ? "3:2" : "3:1";
    default: return (position == 2 || position == 3) ? "4:2" : "4:1";
  }
}

FeatureMatrix core_relation_features(const CoreGraph& core) {
  FeatureMatrix m;
  m.scheme = FeatureScheme::CoreRelation;
  m.catalog = core.rel_catalog();
  m.core_digest = core.digest();
  m.rows.reserve(core.edge_count());
  for (const CoreEdge& e : core.edges()) {
    m.rows.emplace_back(e.rel_types.begin(), e.rel_types.end());
  }
  return m;
}

FeatureMatrix path_features(const HinStore& store, const CoreGraph& core,
                            const std::vector<std::vector<PathSignature>>& per_edge,
                            std::span<const PathSignature> vocab) {
  if (per_edge.size() != core.edge_count()) {
    throw std::invalid_argument("per-edge path sets not aligned with core edges");
  }
  const auto rank = name_ranks(store);
  std::map<PathSignature, std::uint32_t, RankLess> column{RankLess{&rank}};
  FeatureMatrix m;
  m.scheme = FeatureScheme::Path;
  m.core_digest = core.digest();
  for (const PathSignature& sig : vocab) {
    if (column.emplace(sig, static_cast<std::uint32_t>(m.catalog.size())).second) {
      m.catalog.push_back(signature_name(store, sig));
    }
  }
  m.rows.resize(per_edge.size());
  for (std::size_t e = 0; e < per_edge.size(); ++e) {
    std::vector<std::uint32_t> cols;
    for (const PathSignature& sig : per_edge[e]) {
      auto it = column.find(sig);
      if (it != column.end()) cols.push_back(it->second);
    }
    m.rows[e] = sorted_unique(std::move(cols));
  }
  return m;
}

FeatureMatrix path_segment_features(const HinStore& store, const CoreGraph& core,
                                    const std::vector<std::vector<PathSignature>>& per_edge) {
  if (per_edge.size() != core.edge_count()) {
    throw std::invalid_argument("per-edge path sets not aligned with core edges");
  }
  // First pass: which (rel_type, segment) cells occur at all.
  std::set<std::pair<std::string, std::string>> cells;
  for (const auto& sigs : per_edge) {
    for (const PathSignature& sig : sigs) {
      for (int pos = 1; pos <= sig.length; ++pos) {
        cells.emplace(store.rel_type_name(sig.rels[pos - 1]), segment_of(pos, sig.length));
      }
    }
  }
  FeatureMatrix m;
  m.scheme = FeatureScheme::PathSegment;
  m.core_digest = core.digest();
  std::map<std::pair<std::string, std::string>, std::uint32_t> column;
  for (const auto& cell : cells) {
    column.emplace(cell, static_cast<std::uint32_t>(m.catalog.size()));
    m.catalog.push_back(cell.first + "@" + cell.second);
  }
  m.rows.resize(per_edge.size());
  for (std::size_t e = 0; e < per_edge.size(); ++e) {
    std::vector<std::uint32_t> cols;
    for (const PathSignature& sig : per_edge[e]) {
      for (int pos = 1; pos <= sig.length; ++pos) {
        cols.push_back(column.at({store.rel_type_name(sig.rels[pos - 1]),
                                  segment_of(pos, sig.length)}));
      }
    }
    m.rows[e] = sorted_unique(std::move(cols));
  }
  return m;
}

FeatureMatrix extract_features(const HinStore& store, const CoreGraph& core,
                               FeatureScheme scheme, const PathOptions& options) {
  if (scheme == FeatureScheme::CoreRelation) return core_relation_features(core);
  auto per_edge = collect_edge_paths(store, core, options);
  if (scheme == FeatureScheme::Path) {
    auto vocab = select_top_paths(store, per_edge, options.top_k);
    return path_features(store, core, per_edge, vocab);
  }
  return path_segment_features(store, core, per_edge);
}

void FeatureMatrix::require_match(const CoreGraph& core) const {
  if (rows.size() != core.edge_count() || core_digest != core.digest()) {
    throw std::runtime_error("feature matrix does not match this core graph");
  }
}

void FeatureMatrix::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  std::size_t nnz = 0;
  for (const auto& row : rows) nnz += row.size();
  out << "#hinscreen-features\tv1\n";
  out << "#scheme\t" << to_string(scheme) << '\n';
  char digest_hex[17];
  std::snprintf(digest_hex, sizeof(digest_hex), "%016llx",
                static_cast<unsigned long long>(core_digest));
  out << "#core_digest\t" << digest_hex << '\n';
  out << "#counts\t" << rows.size() << '\t' << catalog.size() << '\t' << nnz << '\n';
  for (const auto& name : catalog) out << "C\t" << name << '\n';
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::uint32_t c : rows[r]) out << "X\t" << r << '\t' << c << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

FeatureMatrix FeatureMatrix::load(const std::string& path) {
  FeatureMatrix m;
  bool header_seen = false;
  std::size_t expected_rows = 0;
  auto fail = [&](std::size_t lineno, const std::string& msg) {
    throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + msg);
  };
  tsv::for_each_line(path, [&](std::size_t lineno, std::string_view line) {
    if (line.empty()) return;
    auto fields = tsv::split(line);
    if (!header_seen) {
      if (fields.size() < 2 || fields[0] != "#hinscreen-features" || fields[1] != "v1") {
        fail(lineno, "not a v1 feature file");
      }
      header_seen = true;
      return;
    }
    if (fields[0] == "#scheme" && fields.size() == 2) {
      auto scheme = parse_feature_scheme(fields[1]);
      if (!scheme) fail(lineno, "unknown scheme");
      m.scheme = *scheme;
      return;
    }
    if (fields[0] == "#core_digest" && fields.size() == 2) {
      m.core_digest = std::strtoull(std::string(fields[1]).c_str(), nullptr, 16);
      return;
    }
    if (fields[0] == "#counts" && fields.size() == 4) {
      long long r;
      if (!tsv::parse_int64(fields[1], r) || r < 0) fail(lineno, "bad row count");
      expected_rows = static_cast<std::size_t>(r);
      m.rows.resize(expected_rows);
      return;
    }
    if (fields[0] == "C") {
      if (fields.size() != 2) fail(lineno, "bad catalog line");
      m.catalog.emplace_back(fields[1]);
      return;
    }
    if (fields[0] == "X") {
      if (fields.size() != 3) fail(lineno, "bad entry line");
      long long r, c;
      if (!tsv::parse_int64(fields[1], r) || !tsv::parse_int64(fields[2], c) || r < 0 || c < 0) {
        fail(lineno, "bad entry indices");
      }
      if (static_cast<std::size_t>(r) >= m.rows.size() ||
          static_cast<std::size_t>(c) >= m.catalog.size()) {
        fail(lineno, "entry out of bounds");
      }
      m.rows[static_cast<std::size_t>(r)].push_back(static_cast<std::uint32_t>(c));
      return;
    }
    if (!fields[0].empty() && fields[0][0] == '#') return;
    fail(lineno, "unknown record tag");
  });
  if (!header_seen) throw std::runtime_error(path + ": empty feature file");
  for (auto& row : m.rows) row = sorted_unique(std::move(row));
  return m;
}

}  // namespace hinscreen
