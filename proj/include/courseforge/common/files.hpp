#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace courseforge {

// Throws courseforge::Error (user, "io") when the file cannot be read.
std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temp file and renames it over `path`; readers see
// either the old or the new content.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace courseforge
