#pragma once

#include <string>
#include <string_view>

namespace senseknn {

/// Reads a whole file. Throws Error naming the path when it cannot be opened.
std::string read_file(const std::string& path);

void write_file(const std::string& path, std::string_view bytes);

}  // namespace senseknn
