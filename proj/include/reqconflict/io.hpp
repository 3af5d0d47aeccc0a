#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace reqconflict {

std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temp file and renames it over `path`; creates parent
/// directories as needed.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace reqconflict
