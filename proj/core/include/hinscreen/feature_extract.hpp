#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hinscreen/core_network.hpp"
#include "hinscreen/hin_store.hpp"

namespace hinscreen {

enum class FeatureScheme { CoreRelation, Path, PathSegment };

std::string_view to_string(FeatureScheme scheme);
std::optional<FeatureScheme> parse_feature_scheme(std::string_view text);  // relation|path|segment

// Relation-type sequence along a path, canonicalized so a signature and its
// reversal compare equal (the graph is undirected). Indices refer to the
// store's rel type catalog.
struct PathSignature {
  std::uint8_t length = 0;
  std::array<std::uint32_t, 4> rels{};

  friend bool operator==(const PathSignature&, const PathSignature&) = default;
};

struct PathOptions {
  int max_len = 4;
  std::size_t top_k = 3000;
  // Nodes with more incident relations than this are never traversed as
  // path intermediates; 0 disables the cap.
  std::size_t expansion_cap = 10000;
  unsigned threads = 1;
};

// Binary edge-feature matrix, row-aligned with CoreGraph edges. Rows store
// sorted active column indices. core_digest ties a serialized matrix to the
// core graph it was extracted from.
struct FeatureMatrix {
  FeatureScheme scheme = FeatureScheme::CoreRelation;
  std::vector<std::string> catalog;
  std::vector<std::vector<std::uint32_t>> rows;
  std::uint64_t core_digest = 0;

  std::size_t row_count() const { return rows.size(); }
  std::size_t col_count() const { return catalog.size(); }

  // Throws std::runtime_error when the matrix was not built from this core.
  void require_match(const CoreGraph& core) const;

  void save(const std::string& path) const;
  static FeatureMatrix load(const std::string& path);
};

// Simple paths of length <= max_len between the two endpoints, with
// dominance pruning applied length-ascending: a path is discarded when any
// of its intermediate nodes already serves as an intermediate on a retained
// strictly-shorter path for the same pair. Results are deduplicated
// signatures in catalog-name order. Throws on unknown endpoints or i == j.
std::vector<PathSignature> enumerate_paths(const HinStore& store, std::string_view from_key,
                                           std::string_view to_key,
                                           const PathOptions& options = {});

// Per-core-edge signature sets in edge order (parallel across edges).
std::vector<std::vector<PathSignature>> collect_edge_paths(const HinStore& store,
                                                           const CoreGraph& core,
                                                           const PathOptions& options = {});

// The k signatures present on the most edges; ties prefer the signature
// whose rel-type name sequence is lexicographically smaller. Output keeps
// (count desc, name-lex asc) order.
std::vector<PathSignature> select_top_paths(
    const HinStore& store, const std::vector<std::vector<PathSignature>>& per_edge,
    std::size_t k);

std::string signature_name(const HinStore& store, const PathSignature& sig);

// Symmetry-reduced position class of edge `position` (1-based) in a path of
// `length` edges: 1, 2, 3:1, 3:2, 4:1, 4:2. Throws on length > 4 or
// position outside [1, length].
std::string segment_of(int position, int length);

FeatureMatrix core_relation_features(const CoreGraph& core);
FeatureMatrix path_features(const HinStore& store, const CoreGraph& core,
                            const std::vector<std::vector<PathSignature>>& per_edge,
                            std::span<const PathSignature> vocab);
FeatureMatrix path_segment_features(const HinStore& store, const CoreGraph& core,
                                    const std::vector<std::vector<PathSignature>>& per_edge);

// One-call dispatch used by the CLI and the benchmark.
FeatureMatrix extract_features(const HinStore& store, const CoreGraph& core,
                               FeatureScheme scheme, const PathOptions& options = {});

}  // namespace hinscreen
