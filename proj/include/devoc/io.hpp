#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace devoc {

/// Writes to a sibling temporary file, then renames over the target.
void write_text_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_text(const std::filesystem::path& path);

} // namespace devoc
