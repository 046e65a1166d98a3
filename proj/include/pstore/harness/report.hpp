#pragma once

#include <string>

#include "json.hpp"

namespace pstore::harness {

/// Canonical JSON text of a report: sorted keys, two-space indent.
std::string render_json(const nlohmann::json& report);
/// Human-readable summary of a run, sweep, restart or interleave report.
std::string render_text(const nlohmann::json& report);

}  // namespace pstore::harness
