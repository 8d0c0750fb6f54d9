#pragma once

#include <CLI11.hpp>

namespace hinscreen::cli {

struct CommonFlags {
  int threads = 1;
};

// ingest, build-core, split, features
void register_data_commands(CLI::App& app, const CommonFlags& common);
// train, predict, evaluate, export-weights
void register_model_commands(CLI::App& app, const CommonFlags& common);
// event-study, explain, bench
void register_analysis_commands(CLI::App& app, const CommonFlags& common);

}  // namespace hinscreen::cli
