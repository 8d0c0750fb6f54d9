#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hinscreen/hin_store.hpp"

namespace hinscreen {

using NodeIndex = std::uint32_t;
using EdgeIndex = std::uint32_t;

struct CoreEdge {
  NodeIndex a = 0;  // a < b always
  NodeIndex b = 0;
  std::vector<std::uint32_t> rel_types;  // sorted indices into rel_catalog, non-empty
};

// Undirected simple graph over the prediction universe. Nodes are sorted by
// key and edges by (a, b), so construction is independent of store
// iteration order. Immutable after construction.
class CoreGraph {
 public:
  std::size_t node_count() const { return node_keys_.size(); }
  std::size_t edge_count() const { return edges_.size(); }

  const std::string& node_key(NodeIndex v) const { return node_keys_.at(v); }
  std::optional<NodeIndex> find_node(std::string_view key) const;
  const CoreEdge& edge(EdgeIndex e) const { return edges_.at(e); }
  std::span<const CoreEdge> edges() const { return edges_; }

  // Sorted (neighbor, edge index) pairs. Throws on unknown node.
  std::span<const std::pair<NodeIndex, EdgeIndex>> neighbors(NodeIndex v) const;
  std::size_t degree(NodeIndex v) const { return neighbors(v).size(); }

  // Rel type names present on core edges, sorted; edge rel_types index into
  // this catalog.
  const std::vector<std::string>& rel_catalog() const { return rel_catalog_; }

  // Default edge weights (all 1). Learned models supply their own vector.
  std::vector<double> unit_weights() const { return std::vector<double>(edges_.size(), 1.0); }

  // Fingerprint over node keys and edge structure; serialized feature
  // matrices carry it so mismatched core/feature pairs are rejected early.
  std::uint64_t digest() const;

  void save(const std::string& path) const;
  static CoreGraph load(const std::string& path);

  friend struct CoreBuilder;

 private:
  std::vector<std::string> node_keys_;
  std::vector<CoreEdge> edges_;
  std::vector<std::string> rel_catalog_;
  std::vector<std::size_t> adj_offsets_;
  std::vector<std::pair<NodeIndex, EdgeIndex>> adj_items_;
};

struct BuildCoreResult {
  CoreGraph graph;
  std::vector<std::string> isolated;  // universe keys with no intra-universe edge, sorted
};

// Connects two universe members iff at least one relation links them in the
// store (either direction). Universe keys missing from the store are treated
// as isolated. Throws std::invalid_argument on an empty universe.
BuildCoreResult build_core(const HinStore& store, const std::vector<std::string>& universe);

// Node-list files: one key per line, '#' comments allowed.
std::vector<std::string> load_node_list(const std::string& path);

}  // namespace hinscreen
