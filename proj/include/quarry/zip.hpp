#pragma once

#include <map>
#include <string>
#include <string_view>

namespace quarry {

/// Reads every file entry of a zip archive (stored or deflated) into memory,
/// keyed by entry name. Throws LoadError on anything it cannot read.
std::map<std::string, std::string> read_zip(std::string_view archive);

}  // namespace quarry
