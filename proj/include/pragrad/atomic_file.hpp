#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string_view>

namespace pragrad {

// Writes through `fill` into a temporary file next to `path`, flushes, then
// renames it over `path`. On any failure the temporary is removed and the
// final path is left untouched. Parent directories are created.
void write_file_atomically(const std::filesystem::path& path,
                           const std::function<void(std::ostream&)>& fill);
void write_file_atomically(const std::filesystem::path& path, std::string_view contents);

}  // namespace pragrad
