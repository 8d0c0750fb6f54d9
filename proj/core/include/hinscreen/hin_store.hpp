#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hinscreen/dates.hpp"

namespace hinscreen {

enum class NodeKind { Firm, Person, Stock, Location, Goods, Page, Other };

std::string_view to_string(NodeKind kind);
std::optional<NodeKind> parse_node_kind(std::string_view text);

using EntityIndex = std::uint32_t;
using RelTypeIndex = std::uint32_t;

struct Entity {
  std::string key;  // opaque unique identifier
  NodeKind kind = NodeKind::Other;
  std::map<std::string, std::string> attributes;
};

struct Relation {
  EntityIndex src = 0;
  EntityIndex dst = 0;
  RelTypeIndex rel_type = 0;
  std::optional<Date> first_date;  // absent = undated
  std::optional<Date> last_date;
  std::optional<double> weight;  // ownership share in [0,1]
};

struct IngestReport {
  std::size_t sources_loaded = 0;
  std::size_t entities = 0;
  std::size_t relations = 0;
  std::size_t merged_entities = 0;
  std::map<std::string, std::size_t> dropped_relations;  // reason -> count
  std::vector<std::string> record_errors;                // "source:line: message"
  std::vector<std::string> warnings;
};

// Which exact-match keys participate in entity resolution, plus the
// name-similarity threshold that every candidate pair must also clear.
struct MergeRules {
  double name_tau = 0.9;
  bool use_homepage = true;
  bool use_coordinates = true;
  bool use_ticker = true;
};

// Normalized longest-common-subsequence ratio 2*LCS/(|a|+|b|) on
// case-folded, punctuation-stripped names. 1.0 for two empty names.
double name_similarity(std::string_view a, std::string_view b);

// Mutable while a single ingestion pipeline builds it; read-only (and safe
// for concurrent reads) afterwards. Adjacency is built lazily on first
// incidence query and invalidated by any mutation.
class HinStore {
 public:
  // ---- construction ----
  EntityIndex intern_entity(std::string_view key);  // creates kind=Other on first sight
  void set_kind(EntityIndex id, NodeKind kind);
  // Empty value erases. Latitude/longitude are range-checked and rejected
  // (returns false) when out of [-90,90] / [-180,180].
  bool set_attribute(EntityIndex id, std::string_view name, std::string_view value);

  RelTypeIndex intern_rel_type(std::string_view name);
  void add_relation(const Relation& rel);

  // ---- loading ----
  // Edge rows: src_key \t rel_type \t dst_key \t date|- \t weight|-.
  // Node rows: node_key \t attr_name \t value ("kind" sets the node kind).
  // Malformed rows are recorded in the report and skipped; an unreadable
  // file throws std::runtime_error naming the path.
  std::size_t load_edge_file(const std::string& path, IngestReport& report);
  std::size_t load_node_file(const std::string& path, IngestReport& report);

  // ---- cleanup passes ----
  // Unifies entities with name-similarity >= tau AND at least one active
  // exact key (homepage / coordinates rounded to 5 decimals / ticker) in
  // common, transitively closed, repeated until fixpoint. Pairs whose kind
  // tags differ are rejected and logged. Relations are re-pointed; merge
  // self-loops are dropped. Returns merged-away key -> canonical key.
  std::map<std::string, std::string> merge_entities(const MergeRules& rules,
                                                    IngestReport* report = nullptr);

  // Drops relations whose rel_type occurs fewer than min_count times
  // globally, or whose rel_type is blacklisted; compacts the catalog.
  void filter_relations(std::size_t min_count, const std::set<std::string>& blacklist,
                        IngestReport* report = nullptr);

  // Drops weighted relations below ownership_threshold, then collapses
  // duplicate (src, dst, rel_type) triples to one relation spanning
  // [min first_date, max last_date] with the max weight.
  void collapse_temporal_edges(double ownership_threshold, IngestReport* report = nullptr);

  // ---- queries ----
  std::size_t entity_count() const { return entities_.size(); }
  std::size_t relation_count() const { return relations_.size(); }
  std::size_t rel_type_count() const { return rel_type_names_.size(); }
  const Entity& entity(EntityIndex id) const { return entities_.at(id); }
  std::optional<EntityIndex> find_entity(std::string_view key) const;
  const std::string& rel_type_name(RelTypeIndex id) const { return rel_type_names_.at(id); }
  std::optional<RelTypeIndex> find_rel_type(std::string_view name) const;
  std::span<const Relation> relations() const { return relations_; }

  // Undirected incidence, deduplicated to distinct (neighbor, rel_type)
  // pairs and sorted; self-loops are not listed. incident_degree counts raw
  // incident relations (the super-node expansion cap is measured against
  // this). Adjacency is built lazily by the first query; call
  // build_adjacency() once before handing the store to concurrent readers.
  void build_adjacency() const { ensure_adjacency(); }
  std::span<const std::pair<EntityIndex, RelTypeIndex>> incident(EntityIndex id) const;
  std::size_t incident_degree(EntityIndex id) const;
  // Distinct rel_types linking a and b in either direction.
  std::vector<RelTypeIndex> rel_types_between(EntityIndex a, EntityIndex b) const;

  // ---- serialization ----
  void save(const std::string& path) const;
  static HinStore load(const std::string& path);

 private:
  void invalidate_adjacency();
  void ensure_adjacency() const;

  std::vector<Entity> entities_;
  std::map<std::string, EntityIndex, std::less<>> entity_index_;
  std::vector<std::string> rel_type_names_;
  std::map<std::string, RelTypeIndex, std::less<>> rel_type_index_;
  std::vector<Relation> relations_;

  // Lazy undirected adjacency (CSR over sorted unique (neighbor, rel)).
  mutable bool adjacency_built_ = false;
  mutable std::vector<std::size_t> adj_offsets_;
  mutable std::vector<std::pair<EntityIndex, RelTypeIndex>> adj_items_;
  mutable std::vector<std::size_t> raw_degree_;
};

// Full ingestion pipeline as run by the CLI: load all edge and node files,
// merge entities, filter rel types, collapse temporal duplicates.
struct IngestConfig {
  MergeRules merge;
  bool do_merge = true;
  std::size_t min_rel_count = 100;
  std::set<std::string> blacklist;
  double ownership_threshold = 0.05;
};

IngestReport ingest_edges(HinStore& store, const std::vector<std::string>& edge_paths,
                          const std::vector<std::string>& node_paths,
                          const IngestConfig& config);

}  // namespace hinscreen
