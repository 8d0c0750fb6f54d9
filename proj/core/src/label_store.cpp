#include "hinscreen/label_store.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include "hinscreen/tsv.hpp"

namespace hinscreen {

const std::vector<std::string>& default_category_catalog() {
  static const std::vector<std::string> catalog = {
      "Product/Service", "Regulatory",  "Financial",
      "Fraud",           "Workforce",   "Management",
      "Anti-Competitive", "Information", "Workplace",
      "Discrimination-Workforce", "Environmental", "Ownership",
      "Production-Supply", "Corruption", "Human",
      "Sanctions",       "Association"};
  return catalog;
}

EventLoadResult load_events(const std::string& path, const std::set<std::string>& catalog) {
  EventLoadResult result;
  tsv::for_each_line(path, [&](std::size_t lineno, std::string_view line) {
    if (line.empty() || line[0] == '#') return;
    auto record_error = [&](const std::string& msg) {
      result.record_errors.push_back(path + ":" + std::to_string(lineno) + ": " + msg);
    };
    auto fields = tsv::split(line);
    if (fields.size() != 3) {
      record_error("expected 3 tab-separated fields, got " + std::to_string(fields.size()));
      return;
    }
    auto date = Date::parse(fields[0]);
    if (!date) {
      record_error("bad date '" + std::string(fields[0]) + "'");
      return;
    }
    if (fields[1].empty()) {
      record_error("empty firm key");
      return;
    }
    if (!catalog.empty() && !catalog.count(std::string(fields[2]))) {
      record_error("unknown category tag '" + std::string(fields[2]) + "'");
      return;
    }
    result.events.push_back({*date, std::string(fields[1]), std::string(fields[2])});
  });
  return result;
}

std::map<std::string, CategoryList> build_lists(std::span<const NewsEvent> events) {
  std::map<std::string, CategoryList> lists;
  for (const NewsEvent& ev : events) {
    CategoryList& list = lists[ev.category];
    list.category = ev.category;
    auto [it, inserted] = list.entries.try_emplace(ev.firm, ev.date, ev.date);
    if (!inserted) {
      it->second.first = std::min(it->second.first, ev.date);
      it->second.second = std::max(it->second.second, ev.date);
    }
  }
  return lists;
}

std::pair<std::set<std::string>, std::set<std::string>> split_source_target(
    const CategoryList& list, const SplitSpec& spec) {
  if (!spec.valid()) throw std::invalid_argument("invalid split spec");
  std::set<std::string> sources, targets;
  const Date window_start = spec.cutoff.plus_days(-spec.delta_days);
  for (const auto& [firm, span] : list.entries) {
    const Date first = span.first;
    if (first > spec.cutoff) continue;  // future information, unusable for training
    if (first > window_start) {
      targets.insert(firm);
    } else {
      sources.insert(firm);
    }
  }
  return {std::move(sources), std::move(targets)};
}

PredictionSets prediction_targets(const CategoryList& list, const std::set<std::string>& universe,
                                  const SplitSpec& spec) {
  if (!spec.valid()) throw std::invalid_argument("invalid split spec");
  PredictionSets sets;
  for (const auto& firm : universe) {
    auto it = list.entries.find(firm);
    if (it != list.entries.end() && it->second.first <= spec.cutoff) continue;
    sets.candidates.insert(firm);
    if (it != list.entries.end() && it->second.first <= spec.horizon_end) {
      sets.positives.insert(firm);
    }
  }
  return sets;
}

int resolve_delta(const CategoryList& list, Date cutoff, int base_delta, int sparse_delta,
                  std::size_t source_floor) {
  const Date window_start = cutoff.plus_days(-base_delta);
  std::size_t sources = 0;
  for (const auto& [firm, span] : list.entries) {
    if (span.first <= window_start) ++sources;
  }
  return sources < source_floor ? sparse_delta : base_delta;
}

void save_split(const std::string& path, const CategorySplit& split) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << "#hinscreen-split\tv1\n";
  out << "#category\t" << split.category << '\n';
  out << "#cutoff\t" << split.spec.cutoff.to_string() << '\n';
  out << "#delta_days\t" << split.spec.delta_days << '\n';
  out << "#horizon_end\t" << split.spec.horizon_end.to_string() << '\n';
  out << "firm\trole\tlabel\n";
  for (const auto& firm : split.sources) out << firm << "\tsource\t-\n";
  for (const auto& firm : split.targets) out << firm << "\ttarget\t-\n";
  for (const auto& [firm, label] : split.candidates) {
    out << firm << "\tcandidate\t" << label << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

CategorySplit load_split(const std::string& path) {
  CategorySplit split;
  bool header_seen = false;
  bool columns_seen = false;
  auto fail = [&](std::size_t lineno, const std::string& msg) {
    throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + msg);
  };
  tsv::for_each_line(path, [&](std::size_t lineno, std::string_view line) {
    if (line.empty()) return;
    auto fields = tsv::split(line);
    if (!header_seen) {
      if (fields.size() < 2 || fields[0] != "#hinscreen-split" || fields[1] != "v1") {
        fail(lineno, "not a v1 split file");
      }
      header_seen = true;
      return;
    }
    if (fields[0] == "#category" && fields.size() == 2) {
      split.category = std::string(fields[1]);
      return;
    }
    if (fields[0] == "#cutoff" && fields.size() == 2) {
      auto d = Date::parse(fields[1]);
      if (!d) fail(lineno, "bad cutoff date");
      split.spec.cutoff = *d;
      return;
    }
    if (fields[0] == "#delta_days" && fields.size() == 2) {
      long long v;
      if (!tsv::parse_int64(fields[1], v) || v <= 0) fail(lineno, "bad delta_days");
      split.spec.delta_days = static_cast<int>(v);
      return;
    }
    if (fields[0] == "#horizon_end" && fields.size() == 2) {
      auto d = Date::parse(fields[1]);
      if (!d) fail(lineno, "bad horizon_end date");
      split.spec.horizon_end = *d;
      return;
    }
    if (!fields[0].empty() && fields[0][0] == '#') return;
    if (!columns_seen) {
      if (fields.size() != 3 || fields[0] != "firm") fail(lineno, "missing column header");
      columns_seen = true;
      return;
    }
    if (fields.size() != 3) fail(lineno, "expected 3 fields");
    const std::string firm(fields[0]);
    if (fields[1] == "source") {
      split.sources.insert(firm);
    } else if (fields[1] == "target") {
      split.targets.insert(firm);
    } else if (fields[1] == "candidate") {
      long long label;
      if (!tsv::parse_int64(fields[2], label) || (label != 0 && label != 1)) {
        fail(lineno, "candidate label must be 0 or 1");
      }
      split.candidates[firm] = static_cast<int>(label);
    } else {
      fail(lineno, "unknown role '" + std::string(fields[1]) + "'");
    }
  });
  if (!header_seen) throw std::runtime_error(path + ": empty split file");
  if (!split.spec.valid()) throw std::runtime_error(path + ": split spec invalid or missing");
  return split;
}

}  // namespace hinscreen
