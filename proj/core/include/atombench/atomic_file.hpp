#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace atombench {

// Writes content to a temporary sibling and renames it over path, so
// readers never observe a partially written file. Throws IoError.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

// Whole-file read. Throws IoError.
std::string read_file(const std::filesystem::path& path);

}  // namespace atombench
