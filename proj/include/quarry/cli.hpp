#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "quarry/rulemodel.hpp"

namespace quarry {

/// Hook for registering extra selectors and actions before the rule set loads.
using RegistryExtension = std::function<void(Registry&)>;

/// The command-line driver. `args` excludes the program name. Returns
/// 0 when no red events occurred, 1 when some did, 2 on usage or load errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
            const RegistryExtension& extension = {});

/// "out.xml", index 2 of 3 -> "out-2.xml"; single inputs keep the name.
std::string numbered_output(const std::string& path, std::size_t index, std::size_t count);

}  // namespace quarry
