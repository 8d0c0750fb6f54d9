#include "hinscreen/tsv.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <stdexcept>

#include "hinscreen/digest.hpp"

namespace hinscreen {

std::uint64_t digest_file(const std::string& path, std::uint64_t* size_out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  Fnv1a64 digest;
  char buf[1 << 16];
  std::uint64_t total = 0;
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    digest.update(std::string_view(buf, static_cast<std::size_t>(in.gcount())));
    total += static_cast<std::uint64_t>(in.gcount());
  }
  if (size_out) *size_out = total;
  return digest.value();
}

std::string digest_file_hex(const std::string& path, std::uint64_t* size_out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  Fnv1a64 digest;
  char buf[1 << 16];
  std::uint64_t total = 0;
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    digest.update(std::string_view(buf, static_cast<std::size_t>(in.gcount())));
    total += static_cast<std::uint64_t>(in.gcount());
  }
  if (size_out) *size_out = total;
  return digest.hex();
}

}  // namespace hinscreen

namespace hinscreen::tsv {

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return fields;
}

void for_each_line(const std::string& path,
                   const std::function<void(std::size_t, std::string_view)>& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view = line;
    if (!view.empty() && view.back() == '\r') view.remove_suffix(1);
    fn(lineno, view);
  }
}

std::string format_double(double v) {
  char buf[40];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) return buf;
  }
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string format_fixed(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
  return buf;
}

bool parse_double(std::string_view text, double& out) {
  if (text.empty()) return false;
  std::string owned(text);
  char* end = nullptr;
  double v = std::strtod(owned.c_str(), &end);
  if (end != owned.c_str() + owned.size()) return false;
  out = v;
  return true;
}

bool parse_int64(std::string_view text, long long& out) {
  if (text.empty()) return false;
  std::string owned(text);
  char* end = nullptr;
  long long v = std::strtoll(owned.c_str(), &end, 10);
  if (end != owned.c_str() + owned.size()) return false;
  out = v;
  return true;
}

}  // namespace hinscreen::tsv
