#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pstore/directories.hpp"
#include "pstore/object_model.hpp"
#include "pstore/simulation.hpp"

namespace pstore::harness {

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct PolicyDecl {
  std::string name;
  PolicyScope::Kind scope = PolicyScope::Kind::kClass;
  std::string target;  // class id, or the root name for object scope
  PolicyParams params;
  std::size_t line = 0;
};

struct Event {
  std::uint64_t tick = 0;
  std::string action;
  std::vector<std::string> args;              // positional tokens, quotes kept
  std::map<std::string, std::string> opts;    // key=value tokens, quotes kept
  std::string expr;                           // ASSERT only
  std::string text;                           // source line, trimmed
  std::size_t line = 0;

  std::optional<std::string> opt(const std::string& key) const;
};

struct Scenario {
  std::string name;
  std::uint64_t seed = 42;
  std::size_t nodes = 1;
  std::size_t replication = 3;
  std::string durability = "mem";  // "mem" or "dir:<path>"
  DataStrategy data_strategy = DataStrategy::kCoLocated;
  std::size_t repositories = 0;
  std::vector<ClassDescriptor> classes;
  std::vector<PolicyDecl> policies;
  std::vector<Event> events;
};

/// Splits on whitespace; double quotes group, backslash escapes inside them.
std::vector<std::string> tokenize(std::string_view line, std::size_t line_no);
/// Removes surrounding quotes and escapes; other tokens come back unchanged.
std::string unquote(std::string_view token);
bool is_quoted(std::string_view token);

Scenario parse_scenario(std::string_view text, std::string name = "");
/// A built-in fixture name or a file path.
Scenario load_scenario(const std::string& name_or_path);

}  // namespace pstore::harness
