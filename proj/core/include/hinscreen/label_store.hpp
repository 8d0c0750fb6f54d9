#pragma once

#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "hinscreen/dates.hpp"

namespace hinscreen {

struct NewsEvent {
  Date date;
  std::string firm;      // entity key
  std::string category;  // tag from the configured catalog
};

// Per-category exclusion list: first and last negative-news date per firm.
struct CategoryList {
  std::string category;
  std::map<std::string, std::pair<Date, Date>> entries;  // firm -> (first, last)
};

struct SplitSpec {
  Date cutoff;          // last date usable for training
  int delta_days = 31;  // target window length
  Date horizon_end;     // end of the evaluation window

  bool valid() const { return delta_days > 0 && cutoff < horizon_end; }
};

// The built-in category catalog (17 tags). Event loading validates against
// a caller-supplied catalog; pass an empty set to accept any tag.
const std::vector<std::string>& default_category_catalog();

struct EventLoadResult {
  std::vector<NewsEvent> events;
  std::vector<std::string> record_errors;
};

// Event rows: date \t firm_key \t category. Unknown categories and
// malformed rows become per-record errors; unreadable file throws.
EventLoadResult load_events(const std::string& path, const std::set<std::string>& catalog);

// Min/max event date per (firm, category).
std::map<std::string, CategoryList> build_lists(std::span<const NewsEvent> events);

// Firms on the list as of the cutoff, split by recency of their FIRST event:
//   target: first event in (cutoff - delta_days, cutoff]
//   source: first event on or before cutoff - delta_days
// First events after the cutoff land in neither set.
std::pair<std::set<std::string>, std::set<std::string>> split_source_target(
    const CategoryList& list, const SplitSpec& spec);

struct PredictionSets {
  std::set<std::string> candidates;  // universe firms with no event <= cutoff
  std::set<std::string> positives;   // candidates with first event in (cutoff, horizon_end]
};

PredictionSets prediction_targets(const CategoryList& list,
                                  const std::set<std::string>& universe, const SplitSpec& spec);

// Sparse-category fallback: when the source count under base_delta falls
// below source_floor, widen the target window to sparse_delta.
int resolve_delta(const CategoryList& list, Date cutoff, int base_delta = 31,
                  int sparse_delta = 182, std::size_t source_floor = 500);

// A fully materialized split for one category, as written by `split` and
// consumed by train/predict/evaluate.
struct CategorySplit {
  std::string category;
  SplitSpec spec;
  std::set<std::string> sources;
  std::set<std::string> targets;
  std::map<std::string, int> candidates;  // firm -> realized label (0/1)
};

void save_split(const std::string& path, const CategorySplit& split);
CategorySplit load_split(const std::string& path);

}  // namespace hinscreen
