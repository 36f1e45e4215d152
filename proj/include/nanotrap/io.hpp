#pragma once

#include <filesystem>
#include <string>

namespace nanotrap {

/// Write `content` to a temporary file beside `path`, then rename it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

std::string read_file(const std::filesystem::path& path);

}  // namespace nanotrap
