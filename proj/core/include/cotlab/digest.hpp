#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace cotlab {

// FNV-1a, 64 bit. Content digests for result files and the stage manifest
// chain; not a cryptographic hash.
std::uint64_t fnv1a64(std::string_view bytes);

std::string hex64(std::uint64_t value);

inline std::string digest_hex(std::string_view bytes) { return hex64(fnv1a64(bytes)); }

// Digest of a whole file. Throws ConfigError when the file cannot be read.
std::string file_digest_hex(const std::string& path);

}  // namespace cotlab
