#pragma once

#include <map>
#include <string>

namespace pstore::harness {

/// Built-in scenario texts by name.
const std::map<std::string, std::string>& builtin_fixtures();

}  // namespace pstore::harness
