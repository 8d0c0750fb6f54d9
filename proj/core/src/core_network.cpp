#include "hinscreen/core_network.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>
#include <tuple>

#include "hinscreen/digest.hpp"
#include "hinscreen/tsv.hpp"

namespace hinscreen {

struct CoreBuilder {
  // Assembles a CoreGraph from already-canonical parts. Nodes must be
  // sorted by key, pairs unique with a < b, rel sets sorted and non-empty.
  static CoreGraph assemble(std::vector<std::string> node_keys, std::vector<CoreEdge> edges,
                            std::vector<std::string> rel_catalog) {
    CoreGraph g;
    g.node_keys_ = std::move(node_keys);
    g.edges_ = std::move(edges);
    g.rel_catalog_ = std::move(rel_catalog);

    const std::size_t n = g.node_keys_.size();
    std::vector<std::vector<std::pair<NodeIndex, EdgeIndex>>> lists(n);
    for (EdgeIndex e = 0; e < g.edges_.size(); ++e) {
      const CoreEdge& edge = g.edges_[e];
      lists[edge.a].emplace_back(edge.b, e);
      lists[edge.b].emplace_back(edge.a, e);
    }
    g.adj_offsets_.assign(n + 1, 0);
    for (std::size_t v = 0; v < n; ++v) {
      std::sort(lists[v].begin(), lists[v].end());
      g.adj_offsets_[v] = g.adj_items_.size();
      g.adj_items_.insert(g.adj_items_.end(), lists[v].begin(), lists[v].end());
    }
    g.adj_offsets_[n] = g.adj_items_.size();
    return g;
  }
};

std::optional<NodeIndex> CoreGraph::find_node(std::string_view key) const {
  auto it = std::lower_bound(node_keys_.begin(), node_keys_.end(), key);
  if (it == node_keys_.end() || *it != key) return std::nullopt;
  return static_cast<NodeIndex>(it - node_keys_.begin());
}

std::span<const std::pair<NodeIndex, EdgeIndex>> CoreGraph::neighbors(NodeIndex v) const {
  if (v >= node_keys_.size()) throw std::out_of_range("unknown core node");
  return {adj_items_.data() + adj_offsets_[v], adj_offsets_[v + 1] - adj_offsets_[v]};
}

std::uint64_t CoreGraph::digest() const {
  Fnv1a64 d;
  for (const auto& key : node_keys_) {
    d.update(key);
    d.update_byte('\n');
  }
  for (const CoreEdge& e : edges_) {
    d.update(std::to_string(e.a));
    d.update_byte(',');
    d.update(std::to_string(e.b));
    for (auto r : e.rel_types) {
      d.update_byte(';');
      d.update(rel_catalog_[r]);
    }
    d.update_byte('\n');
  }
  return d.value();
}

BuildCoreResult build_core(const HinStore& store, const std::vector<std::string>& universe) {
  if (universe.empty()) throw std::invalid_argument("empty universe");

  // Canonical node candidates: sorted unique universe keys.
  std::vector<std::string> keys(universe);
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());

  std::map<EntityIndex, std::uint32_t> member;  // store id -> candidate index
  for (std::uint32_t i = 0; i < keys.size(); ++i) {
    if (auto id = store.find_entity(keys[i])) member.emplace(*id, i);
  }

  // Collect rel types per unordered candidate pair, direction discarded.
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::set<std::string>> pairs;
  for (const Relation& rel : store.relations()) {
    auto sit = member.find(rel.src);
    if (sit == member.end()) continue;
    auto dit = member.find(rel.dst);
    if (dit == member.end()) continue;
    if (sit->second == dit->second) continue;
    const std::uint32_t lo = std::min(sit->second, dit->second);
    const std::uint32_t hi = std::max(sit->second, dit->second);
    pairs[{lo, hi}].insert(store.rel_type_name(rel.rel_type));
  }

  std::vector<bool> connected(keys.size(), false);
  std::set<std::string> catalog_set;
  for (const auto& [pair, rels] : pairs) {
    connected[pair.first] = connected[pair.second] = true;
    catalog_set.insert(rels.begin(), rels.end());
  }

  BuildCoreResult result;
  std::vector<std::string> node_keys;
  std::vector<std::uint32_t> node_of(keys.size(), 0);
  for (std::uint32_t i = 0; i < keys.size(); ++i) {
    if (connected[i]) {
      node_of[i] = static_cast<std::uint32_t>(node_keys.size());
      node_keys.push_back(keys[i]);
    } else {
      result.isolated.push_back(keys[i]);
    }
  }

  std::vector<std::string> rel_catalog(catalog_set.begin(), catalog_set.end());
  std::map<std::string, std::uint32_t> rel_index;
  for (std::uint32_t r = 0; r < rel_catalog.size(); ++r) rel_index[rel_catalog[r]] = r;

  std::vector<CoreEdge> edges;
  edges.reserve(pairs.size());
  for (const auto& [pair, rels] : pairs) {
    CoreEdge e;
    e.a = node_of[pair.first];
    e.b = node_of[pair.second];
    if (e.a > e.b) std::swap(e.a, e.b);
    for (const auto& name : rels) e.rel_types.push_back(rel_index[name]);
    edges.push_back(std::move(e));
  }
  std::sort(edges.begin(), edges.end(),
            [](const CoreEdge& x, const CoreEdge& y) { return std::tie(x.a, x.b) < std::tie(y.a, y.b); });

  result.graph = CoreBuilder::assemble(std::move(node_keys), std::move(edges), std::move(rel_catalog));
  return result;
}

void CoreGraph::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << "#hinscreen-core\tv1\n";
  out << "#counts\t" << node_keys_.size() << '\t' << edges_.size() << '\t'
      << rel_catalog_.size() << '\n';
  for (const auto& name : rel_catalog_) out << "T\t" << name << '\n';
  for (const auto& key : node_keys_) out << "V\t" << key << '\n';
  for (const CoreEdge& e : edges_) {
    out << "E\t" << node_keys_[e.a] << '\t' << node_keys_[e.b] << '\t';
    for (std::size_t i = 0; i < e.rel_types.size(); ++i) {
      if (i > 0) out << ',';
      out << rel_catalog_[e.rel_types[i]];
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

CoreGraph CoreGraph::load(const std::string& path) {
  std::vector<std::string> rel_catalog;
  std::vector<std::string> node_keys;
  struct RawEdge {
    std::string a, b;
    std::vector<std::string> rels;
  };
  std::vector<RawEdge> raw;
  bool header_seen = false;
  auto fail = [&](std::size_t lineno, const std::string& msg) {
    throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + msg);
  };
  tsv::for_each_line(path, [&](std::size_t lineno, std::string_view line) {
    if (line.empty()) return;
    auto fields = tsv::split(line);
    if (!header_seen) {
      if (fields.size() < 2 || fields[0] != "#hinscreen-core" || fields[1] != "v1") {
        fail(lineno, "not a v1 core file");
      }
      header_seen = true;
      return;
    }
    if (fields[0] == "T") {
      if (fields.size() != 2) fail(lineno, "bad rel type line");
      rel_catalog.emplace_back(fields[1]);
    } else if (fields[0] == "V") {
      if (fields.size() != 2) fail(lineno, "bad node line");
      node_keys.emplace_back(fields[1]);
    } else if (fields[0] == "E") {
      if (fields.size() != 4) fail(lineno, "bad edge line");
      RawEdge e;
      e.a = std::string(fields[1]);
      e.b = std::string(fields[2]);
      std::string_view rels = fields[3];
      while (!rels.empty()) {
        auto comma = rels.find(',');
        e.rels.emplace_back(rels.substr(0, comma));
        if (comma == std::string_view::npos) break;
        rels.remove_prefix(comma + 1);
      }
      if (e.rels.empty()) fail(lineno, "edge without rel types");
      raw.push_back(std::move(e));
    } else if (!fields[0].empty() && fields[0][0] == '#') {
      // ignore annotations
    } else {
      fail(lineno, "unknown record tag");
    }
  });
  if (!header_seen) throw std::runtime_error(path + ": empty core file");

  std::map<std::string, std::uint32_t> rel_index;
  for (std::uint32_t r = 0; r < rel_catalog.size(); ++r) rel_index[rel_catalog[r]] = r;
  std::map<std::string, NodeIndex> node_index;
  for (NodeIndex v = 0; v < node_keys.size(); ++v) node_index[node_keys[v]] = v;

  std::vector<CoreEdge> edges;
  edges.reserve(raw.size());
  for (const RawEdge& r : raw) {
    auto a = node_index.find(r.a);
    auto b = node_index.find(r.b);
    if (a == node_index.end() || b == node_index.end()) {
      throw std::runtime_error(path + ": edge references unknown node");
    }
    CoreEdge e;
    e.a = a->second;
    e.b = b->second;
    if (e.a > e.b) std::swap(e.a, e.b);
    for (const auto& name : r.rels) {
      auto it = rel_index.find(name);
      if (it == rel_index.end()) throw std::runtime_error(path + ": unknown rel type " + name);
      e.rel_types.push_back(it->second);
    }
    std::sort(e.rel_types.begin(), e.rel_types.end());
    edges.push_back(std::move(e));
  }
  return CoreBuilder::assemble(std::move(node_keys), std::move(edges), std::move(rel_catalog));
}

std::vector<std::string> load_node_list(const std::string& path) {
  std::vector<std::string> keys;
  tsv::for_each_line(path, [&](std::size_t, std::string_view line) {
    if (line.empty() || line[0] == '#') return;
    // Allow incidental trailing columns (e.g. reuse of a splits file).
    keys.emplace_back(tsv::split(line)[0]);
  });
  return keys;
}

}  // namespace hinscreen
