#pragma once

#include <string>

namespace speclab {

/// Creates `dir` and any missing parents. No-op when it already exists.
void ensure_directory(const std::string& dir);

/// Writes `content` to `path` through a temporary file in the same
/// directory followed by a rename, so readers never observe a partial
/// file. Parent directories are created as needed. Binary-safe.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace speclab
