#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace hinscreen::cli {

// Reproducibility sidecar written next to every command's primary output:
// the exact invocation, resolved configuration, input digests, seeds, and
// wall time.
struct RunManifest {
  std::vector<std::string> argv;
  std::string version;
  std::map<std::string, std::string> config;
  std::map<std::string, std::string> input_digests;  // path -> fnv1a64 hex
  std::vector<std::uint64_t> seeds;
  double wall_ms = 0.0;

  void add_input(const std::string& path);  // digests the file now
  void write(const std::string& path) const;
};

inline std::string manifest_path_for(const std::string& primary_out) {
  return primary_out + ".manifest.json";
}

// The process argv, captured once by main for inclusion in manifests.
void set_invocation(int argc, char** argv);
const std::vector<std::string>& invocation();

// Captures wall time from construction to finish().
class ManifestTimer {
 public:
  ManifestTimer() : start_(std::chrono::steady_clock::now()) {}

  void finish(RunManifest& manifest, const std::string& primary_out) const {
    const auto elapsed = std::chrono::steady_clock::now() - start_;
    manifest.wall_ms =
        std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(elapsed).count();
    manifest.write(manifest_path_for(primary_out));
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace hinscreen::cli
