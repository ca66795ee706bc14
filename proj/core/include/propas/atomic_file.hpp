#pragma once

#include <filesystem>
#include <functional>
#include <ostream>
#include <string_view>

namespace propas {

/// Writes through a sibling temporary file renamed over `path` on success,
/// so readers never observe a partial file.
void write_atomically(const std::filesystem::path& path,
                      const std::function<void(std::ostream&)>& writer);

void write_atomically(const std::filesystem::path& path, std::string_view content);

}  // namespace propas
