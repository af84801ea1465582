#pragma once

#include <string>

namespace spsa {

/// Writes content to a temporary file in the same directory, then renames it
/// over the target, so readers never observe partial output.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace spsa
