#pragma once

#include <filesystem>
#include <string>

namespace masschase {

/// 17 significant digits, enough to round-trip any double.
std::string format_full(double v);

void write_text_file(const std::filesystem::path& path, const std::string& contents);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace masschase
