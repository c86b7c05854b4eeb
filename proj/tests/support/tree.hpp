#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "fisheyegt/hash.hpp"
#include "fisheyegt/image_io.hpp"

namespace testutil {

/// relative path -> SHA-256 hex of every regular file below `root`.
inline std::map<std::string, std::string> tree_hashes(const std::filesystem::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : std::filesystem::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    out[std::filesystem::relative(e.path(), root).generic_string()] =
        fisheyegt::to_hex(fisheyegt::sha256(fisheyegt::read_file(e.path())));
  }
  return out;
}

}  // namespace testutil
