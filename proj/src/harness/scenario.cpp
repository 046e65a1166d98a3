#include "pstore/harness/scenario.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "pstore/harness/fixtures.hpp"

namespace pstore::harness {

namespace {

const std::set<std::string, std::less<>> kActions = {"CREATE", "SET",  "TRANSFER", "ASSOCIATE", "COMMIT",
                                                     "GET",    "READ", "FAIL",     "JOIN",      "DISK_WIPE",
                                                     "STABILIZE", "RESTART", "ASSERT"};

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

// Drops a trailing comment that is not inside quotes.
std::string_view strip_comment(std::string_view line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (quoted && line[i] == '\\') {
      ++i;
    } else if (line[i] == '"') {
      quoted = !quoted;
    } else if (line[i] == '#' && !quoted) {
      return line.substr(0, i);
    }
  }
  return line;
}

template <typename T>
T parse_number(std::string_view text, std::size_t line, const char* what) {
  T v{};
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || p != text.data() + text.size() || text.empty())
    throw ParseError(line, std::string("bad ") + what + ": '" + std::string(text) + "'");
  return v;
}

// Splits `key=value` at the first '=' outside quotes.
std::optional<std::pair<std::string, std::string>> split_option(const std::string& token) {
  if (token.empty() || token.front() == '"') return std::nullopt;
  auto eq = token.find('=');
  if (eq == std::string::npos || eq == 0) return std::nullopt;
  auto q = token.find('"');
  if (q != std::string::npos && q < eq) return std::nullopt;
  return std::make_pair(token.substr(0, eq), token.substr(eq + 1));
}

PolicyParams parse_params(std::string_view text, std::size_t line) {
  PolicyParams out;
  while (!text.empty()) {
    auto comma = text.find(',');
    auto item = trim(text.substr(0, comma));
    text = comma == std::string_view::npos ? std::string_view{} : text.substr(comma + 1);
    if (item.empty()) continue;
    auto eq = item.find('=');
    if (eq == std::string_view::npos || eq == 0) throw ParseError(line, "policy parameter needs k=v");
    out[std::string(item.substr(0, eq))] = unquote(item.substr(eq + 1));
  }
  return out;
}

void check_event(const Event& ev, const Scenario& sc) {
  auto need = [&](std::size_t n) {
    if (ev.args.size() < n)
      throw ParseError(ev.line, ev.action + " needs " + std::to_string(n) + " argument(s)");
  };
  if (ev.action == "CREATE") {
    need(2);
    bool known = false;
    for (const auto& c : sc.classes) known = known || c.class_id == ev.args[1];
    if (!known) throw ParseError(ev.line, "undeclared class " + ev.args[1]);
  } else if (ev.action == "SET" || ev.action == "ASSOCIATE" || ev.action == "GET") {
    need(2);
  } else if (ev.action == "TRANSFER") {
    need(3);
    parse_number<std::int64_t>(ev.args[2], ev.line, "amount");
    auto part = ev.opt("part").value_or("both");
    if (part != "debit" && part != "credit" && part != "both")
      throw ParseError(ev.line, "part must be debit, credit or both");
  } else if (ev.action == "COMMIT" || ev.action == "READ" || ev.action == "FAIL" || ev.action == "JOIN" ||
             ev.action == "DISK_WIPE") {
    need(1);
    if (auto k = ev.opt("crashAfterStep")) parse_number<std::size_t>(*k, ev.line, "crashAfterStep");
  } else if (ev.action == "ASSERT") {
    if (ev.expr.find("==") == std::string::npos) throw ParseError(ev.line, "ASSERT needs an '==' comparison");
  }
}

}  // namespace

std::optional<std::string> Event::opt(const std::string& key) const {
  auto it = opts.find(key);
  if (it == opts.end()) return std::nullopt;
  return it->second;
}

bool is_quoted(std::string_view token) { return token.size() >= 2 && token.front() == '"' && token.back() == '"'; }

std::string unquote(std::string_view token) {
  if (!is_quoted(token)) return std::string(token);
  std::string out;
  for (std::size_t i = 1; i + 1 < token.size(); ++i) {
    if (token[i] == '\\' && i + 2 < token.size()) ++i;
    out.push_back(token[i]);
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view line, std::size_t line_no) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  bool have = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      cur.push_back(c);
      if (c == '\\' && i + 1 < line.size()) {
        cur.push_back(line[++i]);
      } else if (c == '"') {
        quoted = false;
      }
    } else if (c == ' ' || c == '\t' || c == '\r') {
      if (have) out.push_back(std::move(cur));
      cur.clear();
      have = false;
    } else {
      if (c == '"') quoted = true;
      cur.push_back(c);
      have = true;
    }
  }
  if (quoted) throw ParseError(line_no, "unterminated quote");
  if (have) out.push_back(std::move(cur));
  return out;
}

Scenario parse_scenario(std::string_view text, std::string name) {
  Scenario sc;
  sc.name = std::move(name);
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line = 0;
  std::optional<std::uint64_t> last_tick;
  while (std::getline(in, raw)) {
    ++line;
    const std::string_view body = trim(strip_comment(raw));
    if (body.empty()) continue;
    auto tokens = tokenize(body, line);

    if (body.front() == '@') {
      Event ev;
      ev.line = line;
      ev.text = std::string(body);
      ev.tick = parse_number<std::uint64_t>(std::string_view(tokens[0]).substr(1), line, "tick");
      if (last_tick && ev.tick <= *last_tick) throw ParseError(line, "ticks must be strictly increasing");
      last_tick = ev.tick;
      if (tokens.size() < 2) throw ParseError(line, "missing action");
      ev.action = tokens[1];
      if (!kActions.contains(ev.action)) throw ParseError(line, "unknown action " + ev.action);
      if (ev.action == "ASSERT") {
        auto pos = body.find("ASSERT");
        ev.expr = std::string(trim(body.substr(pos + 6)));
      } else {
        for (std::size_t i = 2; i < tokens.size(); ++i) {
          if (auto kv = split_option(tokens[i]))
            ev.opts[kv->first] = kv->second;
          else
            ev.args.push_back(tokens[i]);
        }
      }
      check_event(ev, sc);
      sc.events.push_back(std::move(ev));
      continue;
    }

    if (tokens[0] == "class") {
      if (tokens.size() < 2) throw ParseError(line, "class needs an id");
      ClassDescriptor cls{tokens[1], {}};
      for (std::size_t i = 2; i < tokens.size(); ++i) {
        auto colon = tokens[i].find(':');
        if (colon == std::string::npos) throw ParseError(line, "field must be name:KIND");
        auto kind = parse_field_kind(std::string_view(tokens[i]).substr(colon + 1));
        if (!kind) throw ParseError(line, "unknown field kind in " + tokens[i]);
        if (cls.field_index(tokens[i].substr(0, colon))) throw ParseError(line, "duplicate field " + tokens[i]);
        cls.fields.push_back(FieldSpec{tokens[i].substr(0, colon), *kind});
      }
      for (const auto& c : sc.classes)
        if (c.class_id == cls.class_id) throw ParseError(line, "class declared twice: " + cls.class_id);
      sc.classes.push_back(std::move(cls));
      continue;
    }

    if (tokens[0] == "policy") {
      if (tokens.size() < 3) throw ParseError(line, "policy needs a name and a scope");
      PolicyDecl decl;
      decl.line = line;
      decl.name = tokens[1];
      auto scope = split_option(tokens[2]);
      if (!scope || scope->first != "scope") throw ParseError(line, "expected scope=class:<id> or scope=object:<name>");
      if (scope->second.starts_with("class:")) {
        decl.scope = PolicyScope::Kind::kClass;
        decl.target = scope->second.substr(6);
      } else if (scope->second.starts_with("object:")) {
        decl.scope = PolicyScope::Kind::kObject;
        decl.target = unquote(scope->second.substr(7));
      } else {
        throw ParseError(line, "scope must be class:<id> or object:<name>");
      }
      if (decl.target.empty()) throw ParseError(line, "empty policy scope");
      if (tokens.size() > 3) {
        if (tokens[3] != "params" || tokens.size() != 5) throw ParseError(line, "expected: params k=v,...");
        decl.params = parse_params(tokens[4], line);
      }
      sc.policies.push_back(std::move(decl));
      continue;
    }

    auto kv = split_option(tokens[0]);
    if (!kv || tokens.size() != 1) throw ParseError(line, "unrecognised line");
    const auto& [key, value] = *kv;
    if (key == "seed") {
      sc.seed = parse_number<std::uint64_t>(value, line, "seed");
    } else if (key == "nodes") {
      sc.nodes = parse_number<std::size_t>(value, line, "nodes");
      if (sc.nodes == 0) throw ParseError(line, "need at least one node");
    } else if (key == "replication") {
      sc.replication = parse_number<std::size_t>(value, line, "replication");
      if (sc.replication == 0) throw ParseError(line, "replication must be at least 1");
    } else if (key == "durability") {
      if (value != "mem" && !value.starts_with("dir:")) throw ParseError(line, "durability must be mem or dir:<path>");
      sc.durability = value;
    } else if (key == "datastore") {
      if (value == "co-located")
        sc.data_strategy = DataStrategy::kCoLocated;
      else if (value == "location-recording")
        sc.data_strategy = DataStrategy::kLocationRecording;
      else
        throw ParseError(line, "datastore must be co-located or location-recording");
    } else if (key == "repositories") {
      sc.repositories = parse_number<std::size_t>(value, line, "repositories");
    } else {
      throw ParseError(line, "unknown setting " + key);
    }
  }
  if (sc.data_strategy == DataStrategy::kLocationRecording && sc.repositories == 0)
    throw ParseError(line, "location-recording needs repositories=<n>");
  return sc;
}

Scenario load_scenario(const std::string& name_or_path) {
  const auto& fixtures = builtin_fixtures();
  if (auto it = fixtures.find(name_or_path); it != fixtures.end()) return parse_scenario(it->second, it->first);
  std::ifstream in(name_or_path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open scenario " + name_or_path);
  std::ostringstream text;
  text << in.rdbuf();
  std::string stem = std::filesystem::path(name_or_path).stem().string();
  return parse_scenario(text.str(), stem);
}

}  // namespace pstore::harness
