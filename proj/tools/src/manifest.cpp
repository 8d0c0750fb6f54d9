#include "manifest.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "hinscreen/digest.hpp"

namespace hinscreen::cli {

namespace {
std::vector<std::string> g_invocation;
}

void set_invocation(int argc, char** argv) {
  g_invocation.assign(argv, argv + argc);
}

const std::vector<std::string>& invocation() { return g_invocation; }

void RunManifest::add_input(const std::string& path) {
  input_digests[path] = digest_file_hex(path);
}

void RunManifest::write(const std::string& path) const {
  nlohmann::json j;
  j["argv"] = argv;
  j["version"] = version;
  j["config"] = config;
  j["input_digests"] = input_digests;
  j["seeds"] = seeds;
  j["wall_ms"] = wall_ms;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write manifest: " + path);
  out << j.dump(2) << '\n';
}

}  // namespace hinscreen::cli
