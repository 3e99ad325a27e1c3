#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace thg::files {

std::string read_all(const std::filesystem::path& path);

// Lines without their terminators; a final empty line is not reported.
std::vector<std::string> read_lines(const std::filesystem::path& path);

// Writes through a temporary sibling and renames, so readers never observe a
// half-written file.
void write_atomic(const std::filesystem::path& path, const std::string& content);

void append_line(const std::filesystem::path& path, const std::string& line);

}  // namespace thg::files
