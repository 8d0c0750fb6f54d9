#include "hinscreen/hin_store.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <tuple>
#include <unordered_map>

#include "hinscreen/tsv.hpp"

namespace hinscreen {

namespace {

constexpr std::string_view kKindNames[] = {"firm",  "person", "stock", "location",
                                           "goods", "page",   "other"};

bool has_control_chars(std::string_view v) {
  return v.find('\t') != std::string_view::npos || v.find('\n') != std::string_view::npos ||
         v.find('\r') != std::string_view::npos;
}

std::string normalize_name(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  for (unsigned char c : raw) {
    if (std::isalnum(c)) {
      if (pending_space && !out.empty()) out.push_back(' ');
      pending_space = false;
      out.push_back(static_cast<char>(std::tolower(c)));
    } else {
      // Punctuation and whitespace both act as soft separators.
      pending_space = true;
    }
  }
  return out;
}

std::size_t lcs_length(std::string_view a, std::string_view b) {
  if (a.empty() || b.empty()) return 0;
  // Two-row DP; names are short so O(|a|*|b|) is fine.
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      if (a[i - 1] == b[j - 1]) {
        cur[j] = prev[j - 1] + 1;
      } else {
        cur[j] = std::max(prev[j], cur[j - 1]);
      }
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

// Disjoint-set over entity indices with path compression.
struct UnionFind {
  std::vector<std::uint32_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0u);
  }
  std::uint32_t find(std::uint32_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  bool unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (a > b) std::swap(a, b);  // keep the smaller index as root (deterministic)
    parent[b] = a;
    return true;
  }
};

std::string coordinate_key(const Entity& e) {
  auto lat = e.attributes.find("latitude");
  auto lon = e.attributes.find("longitude");
  if (lat == e.attributes.end() || lon == e.attributes.end()) return {};
  double la, lo;
  if (!tsv::parse_double(lat->second, la) || !tsv::parse_double(lon->second, lo)) return {};
  // Exact match after rounding to 5 decimal places (~1 m).
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.5f|%.5f", la, lo);
  return buf;
}

std::string field_or_dash(const std::optional<Date>& d) {
  return d ? d->to_string() : "-";
}

}  // namespace

std::string_view to_string(NodeKind kind) {
  return kKindNames[static_cast<std::size_t>(kind)];
}

std::optional<NodeKind> parse_node_kind(std::string_view text) {
  for (std::size_t i = 0; i < std::size(kKindNames); ++i) {
    if (text == kKindNames[i]) return static_cast<NodeKind>(i);
  }
  return std::nullopt;
}

double name_similarity(std::string_view a, std::string_view b) {
  std::string na = normalize_name(a), nb = normalize_name(b);
  if (na.empty() && nb.empty()) return 1.0;
  if (na.empty() || nb.empty()) return 0.0;
  return 2.0 * static_cast<double>(lcs_length(na, nb)) /
         static_cast<double>(na.size() + nb.size());
}

EntityIndex HinStore::intern_entity(std::string_view key) {
  auto it = entity_index_.find(key);
  if (it != entity_index_.end()) return it->second;
  EntityIndex id = static_cast<EntityIndex>(entities_.size());
  Entity e;
  e.key = std::string(key);
  entities_.push_back(std::move(e));
  entity_index_.emplace(entities_.back().key, id);
  invalidate_adjacency();
  return id;
}

void HinStore::set_kind(EntityIndex id, NodeKind kind) { entities_.at(id).kind = kind; }

bool HinStore::set_attribute(EntityIndex id, std::string_view name, std::string_view value) {
  if (has_control_chars(name) || has_control_chars(value)) return false;
  Entity& e = entities_.at(id);
  if (value.empty()) {
    e.attributes.erase(std::string(name));
    return true;
  }
  if (name == "latitude" || name == "longitude") {
    double v;
    if (!tsv::parse_double(value, v)) return false;
    if (name == "latitude" && (v < -90.0 || v > 90.0)) return false;
    if (name == "longitude" && (v < -180.0 || v > 180.0)) return false;
  }
  e.attributes[std::string(name)] = std::string(value);
  return true;
}

RelTypeIndex HinStore::intern_rel_type(std::string_view name) {
  auto it = rel_type_index_.find(name);
  if (it != rel_type_index_.end()) return it->second;
  RelTypeIndex id = static_cast<RelTypeIndex>(rel_type_names_.size());
  rel_type_names_.emplace_back(name);
  rel_type_index_.emplace(rel_type_names_.back(), id);
  return id;
}

void HinStore::add_relation(const Relation& rel) {
  if (rel.src >= entities_.size() || rel.dst >= entities_.size() ||
      rel.rel_type >= rel_type_names_.size()) {
    throw std::invalid_argument("relation references unknown entity or rel_type");
  }
  relations_.push_back(rel);
  invalidate_adjacency();
}

std::optional<EntityIndex> HinStore::find_entity(std::string_view key) const {
  auto it = entity_index_.find(key);
  if (it == entity_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<RelTypeIndex> HinStore::find_rel_type(std::string_view name) const {
  auto it = rel_type_index_.find(name);
  if (it == rel_type_index_.end()) return std::nullopt;
  return it->second;
}

std::size_t HinStore::load_edge_file(const std::string& path, IngestReport& report) {
  std::size_t loaded = 0;
  tsv::for_each_line(path, [&](std::size_t lineno, std::string_view line) {
    if (line.empty() || line[0] == '#') return;
    auto record_error = [&](const std::string& msg) {
      report.record_errors.push_back(path + ":" + std::to_string(lineno) + ": " + msg);
    };
    auto fields = tsv::split(line);
    if (fields.size() != 5) {
      record_error("expected 5 tab-separated fields, got " + std::to_string(fields.size()));
      return;
    }
    if (fields[0].empty() || fields[1].empty() || fields[2].empty()) {
      record_error("empty src, rel_type, or dst field");
      return;
    }
    Relation rel;
    if (fields[3] != "-") {
      auto date = Date::parse(fields[3]);
      if (!date) {
        record_error("bad date '" + std::string(fields[3]) + "'");
        return;
      }
      rel.first_date = rel.last_date = *date;
    }
    if (fields[4] != "-") {
      double w;
      if (!tsv::parse_double(fields[4], w) || w < 0.0 || w > 1.0) {
        record_error("bad weight '" + std::string(fields[4]) + "' (must be in [0,1])");
        return;
      }
      rel.weight = w;
    }
    rel.src = intern_entity(fields[0]);
    rel.dst = intern_entity(fields[2]);
    rel.rel_type = intern_rel_type(fields[1]);
    relations_.push_back(rel);
    ++loaded;
  });
  invalidate_adjacency();
  report.sources_loaded += 1;
  return loaded;
}

std::size_t HinStore::load_node_file(const std::string& path, IngestReport& report) {
  std::size_t loaded = 0;
  tsv::for_each_line(path, [&](std::size_t lineno, std::string_view line) {
    if (line.empty() || line[0] == '#') return;
    auto record_error = [&](const std::string& msg) {
      report.record_errors.push_back(path + ":" + std::to_string(lineno) + ": " + msg);
    };
    auto fields = tsv::split(line);
    if (fields.size() != 3) {
      record_error("expected 3 tab-separated fields, got " + std::to_string(fields.size()));
      return;
    }
    if (fields[0].empty() || fields[1].empty()) {
      record_error("empty node key or attribute name");
      return;
    }
    EntityIndex id = intern_entity(fields[0]);
    if (fields[1] == "kind") {
      auto kind = parse_node_kind(fields[2]);
      if (!kind) {
        record_error("unknown node kind '" + std::string(fields[2]) + "'");
        return;
      }
      set_kind(id, *kind);
    } else if (!set_attribute(id, fields[1], fields[2])) {
      record_error("rejected attribute '" + std::string(fields[1]) + "' value '" +
                   std::string(fields[2]) + "'");
      return;
    }
    ++loaded;
  });
  report.sources_loaded += 1;
  return loaded;
}

std::map<std::string, std::string> HinStore::merge_entities(const MergeRules& rules,
                                                            IngestReport* report) {
  std::map<std::string, std::string> resolution;
  // Attribute merging can surface new names, so repeat until a pass finds
  // nothing; in practice this settles in one or two passes.
  for (int pass = 0; pass < 10; ++pass) {
    UnionFind uf(entities_.size());
    std::size_t unions = 0;

    auto scan_block = [&](const std::vector<EntityIndex>& members) {
      for (std::size_t i = 0; i < members.size(); ++i) {
        for (std::size_t j = i + 1; j < members.size(); ++j) {
          const Entity& a = entities_[members[i]];
          const Entity& b = entities_[members[j]];
          if (a.kind != b.kind) {
            if (report) {
              report->warnings.push_back("merge rejected (kind conflict): " + a.key + " [" +
                                         std::string(to_string(a.kind)) + "] vs " + b.key +
                                         " [" + std::string(to_string(b.kind)) + "]");
            }
            continue;
          }
          auto name_of = [](const Entity& e) -> std::string_view {
            auto it = e.attributes.find("name");
            return it == e.attributes.end() ? std::string_view{} : std::string_view(it->second);
          };
          if (name_similarity(name_of(a), name_of(b)) < rules.name_tau) continue;
          if (uf.unite(members[i], members[j])) ++unions;
        }
      }
    };

    auto block_on = [&](auto&& key_fn) {
      std::map<std::string, std::vector<EntityIndex>> blocks;
      for (EntityIndex id = 0; id < entities_.size(); ++id) {
        std::string key = key_fn(entities_[id]);
        if (!key.empty()) blocks[key].push_back(id);
      }
      for (auto& [key, members] : blocks) {
        if (members.size() > 1) scan_block(members);
      }
    };

    if (rules.use_homepage) {
      block_on([](const Entity& e) {
        auto it = e.attributes.find("homepage");
        return it == e.attributes.end() ? std::string() : it->second;
      });
    }
    if (rules.use_ticker) {
      block_on([](const Entity& e) {
        auto it = e.attributes.find("ticker");
        return it == e.attributes.end() ? std::string() : it->second;
      });
    }
    if (rules.use_coordinates) {
      block_on(coordinate_key);
    }

    if (unions == 0) break;

    // Collapse each union class onto the member with the smallest key.
    std::vector<EntityIndex> canonical(entities_.size());
    std::map<std::uint32_t, std::vector<EntityIndex>> classes;
    for (EntityIndex id = 0; id < entities_.size(); ++id) {
      classes[uf.find(id)].push_back(id);
    }
    for (auto& [root, members] : classes) {
      EntityIndex best = members[0];
      for (EntityIndex m : members) {
        if (entities_[m].key < entities_[best].key) best = m;
      }
      for (EntityIndex m : members) canonical[m] = best;
    }

    std::vector<Entity> merged;
    std::vector<EntityIndex> new_id(entities_.size());
    for (EntityIndex id = 0; id < entities_.size(); ++id) {
      if (canonical[id] != id) continue;
      new_id[id] = static_cast<EntityIndex>(merged.size());
      merged.push_back(std::move(entities_[id]));
    }
    for (EntityIndex id = 0; id < canonical.size(); ++id) {
      if (canonical[id] == id) continue;
      new_id[id] = new_id[canonical[id]];
      Entity& canon = merged[new_id[id]];
      resolution[entities_[id].key] = canon.key;
      // Keep the lexicographically-first non-empty value per attribute key;
      // deterministic regardless of member order.
      for (auto& [k, v] : entities_[id].attributes) {
        auto it = canon.attributes.find(k);
        if (it == canon.attributes.end() || v < it->second) canon.attributes[k] = v;
      }
      if (report) ++report->merged_entities;
    }

    std::vector<Relation> kept;
    kept.reserve(relations_.size());
    std::size_t self_loops = 0;
    for (Relation rel : relations_) {
      rel.src = new_id[rel.src];
      rel.dst = new_id[rel.dst];
      if (rel.src == rel.dst) {
        ++self_loops;
        continue;
      }
      kept.push_back(rel);
    }
    if (self_loops > 0 && report) {
      report->dropped_relations["self_loop_after_merge"] += self_loops;
    }
    relations_ = std::move(kept);
    entities_ = std::move(merged);
    entity_index_.clear();
    for (EntityIndex id = 0; id < entities_.size(); ++id) {
      entity_index_.emplace(entities_[id].key, id);
    }
    // Re-point earlier resolutions at the surviving canonical key.
    for (auto& [old_key, canon_key] : resolution) {
      auto moved = resolution.find(canon_key);
      if (moved != resolution.end()) canon_key = moved->second;
    }
    invalidate_adjacency();
  }
  return resolution;
}

void HinStore::filter_relations(std::size_t min_count, const std::set<std::string>& blacklist,
                                IngestReport* report) {
  std::vector<std::size_t> counts(rel_type_names_.size(), 0);
  for (const Relation& rel : relations_) ++counts[rel.rel_type];

  std::vector<bool> drop(rel_type_names_.size(), false);
  bool any_drop = false;
  for (RelTypeIndex r = 0; r < rel_type_names_.size(); ++r) {
    if (blacklist.count(rel_type_names_[r])) {
      drop[r] = true;
      if (report) report->dropped_relations["rel_type_blacklisted"] += counts[r];
    } else if (counts[r] < min_count) {
      drop[r] = true;
      if (report) report->dropped_relations["rel_type_below_min_count"] += counts[r];
    }
    any_drop = any_drop || drop[r];
  }
  if (!any_drop) return;  // identity: min_count=0 with empty blacklist changes nothing

  std::vector<Relation> kept;
  kept.reserve(relations_.size());
  for (const Relation& rel : relations_) {
    if (!drop[rel.rel_type]) kept.push_back(rel);
  }
  relations_ = std::move(kept);

  // Compact the catalog to rel types that still occur.
  std::vector<bool> used(rel_type_names_.size(), false);
  for (const Relation& rel : relations_) used[rel.rel_type] = true;
  std::vector<RelTypeIndex> remap(rel_type_names_.size(), 0);
  std::vector<std::string> new_names;
  for (RelTypeIndex r = 0; r < rel_type_names_.size(); ++r) {
    if (!used[r]) continue;
    remap[r] = static_cast<RelTypeIndex>(new_names.size());
    new_names.push_back(std::move(rel_type_names_[r]));
  }
  for (Relation& rel : relations_) rel.rel_type = remap[rel.rel_type];
  rel_type_names_ = std::move(new_names);
  rel_type_index_.clear();
  for (RelTypeIndex r = 0; r < rel_type_names_.size(); ++r) {
    rel_type_index_.emplace(rel_type_names_[r], r);
  }
  invalidate_adjacency();
}

void HinStore::collapse_temporal_edges(double ownership_threshold, IngestReport* report) {
  if (ownership_threshold < 0.0 || ownership_threshold > 1.0) {
    throw std::invalid_argument("ownership_threshold must lie in [0,1]");
  }
  // Sub-threshold ownership stakes are dropped before deduplication, so a
  // pair whose only records are small stakes loses the relation entirely.
  std::map<std::tuple<EntityIndex, EntityIndex, RelTypeIndex>, Relation> groups;
  std::size_t below = 0, duplicates = 0;
  for (const Relation& rel : relations_) {
    if (rel.weight && *rel.weight < ownership_threshold) {
      ++below;
      continue;
    }
    auto key = std::make_tuple(rel.src, rel.dst, rel.rel_type);
    auto [it, inserted] = groups.try_emplace(key, rel);
    if (inserted) continue;
    ++duplicates;
    Relation& acc = it->second;
    if (rel.first_date && (!acc.first_date || *rel.first_date < *acc.first_date)) {
      acc.first_date = rel.first_date;
    }
    if (rel.last_date && (!acc.last_date || *rel.last_date > *acc.last_date)) {
      acc.last_date = rel.last_date;
    }
    if (rel.weight && (!acc.weight || *rel.weight > *acc.weight)) acc.weight = rel.weight;
  }
  if (report) {
    if (below > 0) report->dropped_relations["ownership_below_threshold"] += below;
    if (duplicates > 0) report->dropped_relations["temporal_duplicate"] += duplicates;
  }
  relations_.clear();
  relations_.reserve(groups.size());
  for (auto& [key, rel] : groups) relations_.push_back(rel);
  invalidate_adjacency();
}

void HinStore::invalidate_adjacency() {
  adjacency_built_ = false;
  adj_offsets_.clear();
  adj_items_.clear();
  raw_degree_.clear();
}

void HinStore::ensure_adjacency() const {
  if (adjacency_built_) return;
  const std::size_t n = entities_.size();
  raw_degree_.assign(n, 0);
  std::vector<std::vector<std::pair<EntityIndex, RelTypeIndex>>> lists(n);
  for (const Relation& rel : relations_) {
    if (rel.src == rel.dst) continue;
    lists[rel.src].emplace_back(rel.dst, rel.rel_type);
    lists[rel.dst].emplace_back(rel.src, rel.rel_type);
    ++raw_degree_[rel.src];
    ++raw_degree_[rel.dst];
  }
  adj_offsets_.assign(n + 1, 0);
  std::size_t total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    auto& list = lists[i];
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
    total += list.size();
  }
  adj_items_.clear();
  adj_items_.reserve(total);
  for (std::size_t i = 0; i < n; ++i) {
    adj_offsets_[i] = adj_items_.size();
    adj_items_.insert(adj_items_.end(), lists[i].begin(), lists[i].end());
  }
  adj_offsets_[n] = adj_items_.size();
  adjacency_built_ = true;
}

std::span<const std::pair<EntityIndex, RelTypeIndex>> HinStore::incident(EntityIndex id) const {
  ensure_adjacency();
  if (id >= entities_.size()) throw std::out_of_range("unknown entity index");
  return {adj_items_.data() + adj_offsets_[id], adj_offsets_[id + 1] - adj_offsets_[id]};
}

std::size_t HinStore::incident_degree(EntityIndex id) const {
  ensure_adjacency();
  if (id >= entities_.size()) throw std::out_of_range("unknown entity index");
  return raw_degree_[id];
}

std::vector<RelTypeIndex> HinStore::rel_types_between(EntityIndex a, EntityIndex b) const {
  auto span = incident(a);
  std::vector<RelTypeIndex> rels;
  auto lo = std::lower_bound(span.begin(), span.end(),
                             std::make_pair(b, RelTypeIndex{0}));
  for (auto it = lo; it != span.end() && it->first == b; ++it) rels.push_back(it->second);
  return rels;
}

void HinStore::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << "#hinscreen-store\tv1\n";
  out << "#counts\t" << entities_.size() << '\t' << rel_type_names_.size() << '\t'
      << relations_.size() << '\n';
  for (const auto& name : rel_type_names_) out << "T\t" << name << '\n';
  for (const Entity& e : entities_) {
    out << "E\t" << e.key << '\t' << to_string(e.kind) << '\n';
  }
  for (const Entity& e : entities_) {
    for (const auto& [k, v] : e.attributes) {
      out << "N\t" << e.key << '\t' << k << '\t' << v << '\n';
    }
  }
  for (const Relation& rel : relations_) {
    out << "R\t" << entities_[rel.src].key << '\t' << rel_type_names_[rel.rel_type] << '\t'
        << entities_[rel.dst].key << '\t' << field_or_dash(rel.first_date) << '\t'
        << field_or_dash(rel.last_date) << '\t'
        << (rel.weight ? tsv::format_double(*rel.weight) : "-") << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

HinStore HinStore::load(const std::string& path) {
  HinStore store;
  bool header_seen = false;
  auto fail = [&](std::size_t lineno, const std::string& msg) {
    throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + msg);
  };
  tsv::for_each_line(path, [&](std::size_t lineno, std::string_view line) {
    if (line.empty()) return;
    auto fields = tsv::split(line);
    if (!header_seen) {
      if (fields.size() < 2 || fields[0] != "#hinscreen-store" || fields[1] != "v1") {
        fail(lineno, "not a v1 store file");
      }
      header_seen = true;
      return;
    }
    if (fields[0] == "#counts") return;
    if (fields[0] == "T") {
      if (fields.size() != 2) fail(lineno, "bad rel type line");
      store.intern_rel_type(fields[1]);
    } else if (fields[0] == "E") {
      if (fields.size() != 3) fail(lineno, "bad entity line");
      auto kind = parse_node_kind(fields[2]);
      if (!kind) fail(lineno, "unknown kind");
      store.set_kind(store.intern_entity(fields[1]), *kind);
    } else if (fields[0] == "N") {
      if (fields.size() != 4) fail(lineno, "bad attribute line");
      auto id = store.find_entity(fields[1]);
      if (!id) fail(lineno, "attribute for unknown entity");
      if (!store.set_attribute(*id, fields[2], fields[3])) fail(lineno, "bad attribute value");
    } else if (fields[0] == "R") {
      if (fields.size() != 7) fail(lineno, "bad relation line");
      auto src = store.find_entity(fields[1]);
      auto rel_type = store.find_rel_type(fields[2]);
      auto dst = store.find_entity(fields[3]);
      if (!src || !rel_type || !dst) fail(lineno, "relation references unknown entity/rel type");
      Relation rel;
      rel.src = *src;
      rel.dst = *dst;
      rel.rel_type = *rel_type;
      if (fields[4] != "-") {
        auto d = Date::parse(fields[4]);
        if (!d) fail(lineno, "bad first date");
        rel.first_date = d;
      }
      if (fields[5] != "-") {
        auto d = Date::parse(fields[5]);
        if (!d) fail(lineno, "bad last date");
        rel.last_date = d;
      }
      if (fields[6] != "-") {
        double w;
        if (!tsv::parse_double(fields[6], w)) fail(lineno, "bad weight");
        rel.weight = w;
      }
      store.relations_.push_back(rel);
    } else if (fields[0].size() > 0 && fields[0][0] == '#') {
      // Unknown annotation lines are ignored for forward compatibility.
    } else {
      fail(lineno, "unknown record tag");
    }
  });
  if (!header_seen) throw std::runtime_error(path + ": empty store file");
  return store;
}

IngestReport ingest_edges(HinStore& store, const std::vector<std::string>& edge_paths,
                          const std::vector<std::string>& node_paths,
                          const IngestConfig& config) {
  IngestReport report;
  for (const auto& path : edge_paths) store.load_edge_file(path, report);
  for (const auto& path : node_paths) store.load_node_file(path, report);
  if (config.do_merge) store.merge_entities(config.merge, &report);
  store.filter_relations(config.min_rel_count, config.blacklist, &report);
  store.collapse_temporal_edges(config.ownership_threshold, &report);
  report.entities = store.entity_count();
  report.relations = store.relation_count();
  return report;
}

}  // namespace hinscreen
