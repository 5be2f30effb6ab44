#include "cotlab/digest.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "cotlab/error.hpp"

namespace cotlab {

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
  return std::string(buf);
}

std::string file_digest_hex(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read file for digest: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return digest_hex(buf.str());
}

}  // namespace cotlab
