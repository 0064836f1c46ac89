#pragma once

// Shared helpers for the YAML-backed input formats.

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tdsec/errors.hpp"
#include "tdsec/grid_model.hpp"

namespace tdsec::detail {

inline int line_of(const YAML::Node& n) { return n.Mark().line < 0 ? 0 : n.Mark().line + 1; }
inline int column_of(const YAML::Node& n) {
  return n.Mark().column < 0 ? 0 : n.Mark().column + 1;
}

[[noreturn]] inline void fail_at(const YAML::Node& n, InputError::Kind kind, std::string msg,
                                 std::string subject = {}, std::string context = {}) {
  throw InputError(kind, std::move(msg), std::move(subject), std::move(context), line_of(n),
                   column_of(n));
}

inline YAML::Node load_yaml(std::string_view text) {
  try {
    return YAML::Load(std::string(text));
  } catch (const YAML::ParserException& e) {
    throw InputError(InputError::Kind::syntax, e.msg, {}, {}, e.mark.line + 1, e.mark.column + 1);
  }
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(InputError::Kind::io, "cannot open '" + path + "'", path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// "1", "1.0", "1.3" -> major 1. Anything else is rejected.
inline void check_format_version(const YAML::Node& root, std::string_view what,
                                 std::string* out = nullptr) {
  const YAML::Node v = root["format_version"];
  if (!v) fail_at(root, InputError::Kind::syntax, std::string(what) + ": missing format_version");
  const std::string s = v.as<std::string>();
  const auto dot = s.find('.');
  const std::string major = s.substr(0, dot);
  if (major != "1")
    fail_at(v, InputError::Kind::unsupported_version,
            std::string(what) + ": unsupported format_version '" + s + "' (major 1 expected)", s);
  if (out) *out = s;
}

template <class T>
T scalar_as(const YAML::Node& n, std::string_view key, std::string_view ctx) {
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    fail_at(n, InputError::Kind::syntax,
            "field '" + std::string(key) + "' of '" + std::string(ctx) + "' has the wrong type",
            std::string(key), std::string(ctx));
  }
}

template <class T>
T required(const YAML::Node& rec, std::string_view key, std::string_view ctx) {
  const YAML::Node n = rec[std::string(key)];
  if (!n || n.IsNull())
    fail_at(rec, InputError::Kind::syntax,
            "missing field '" + std::string(key) + "' in '" + std::string(ctx) + "'",
            std::string(key), std::string(ctx));
  return scalar_as<T>(n, key, ctx);
}

template <class T>
T optional_or(const YAML::Node& rec, std::string_view key, T fallback, std::string_view ctx) {
  const YAML::Node n = rec[std::string(key)];
  if (!n || n.IsNull()) return fallback;
  return scalar_as<T>(n, key, ctx);
}

template <class T>
std::optional<T> optional_field(const YAML::Node& rec, std::string_view key, std::string_view ctx) {
  const YAML::Node n = rec[std::string(key)];
  if (!n || n.IsNull()) return std::nullopt;
  return scalar_as<T>(n, key, ctx);
}

/// Maps a string field through `parse`, listing `allowed` on failure.
template <class F>
auto enum_field(const YAML::Node& rec, std::string_view key, std::string_view ctx, F parse,
                std::string_view allowed) {
  const YAML::Node n = rec[std::string(key)];
  if (!n || n.IsNull())
    fail_at(rec, InputError::Kind::syntax,
            "missing field '" + std::string(key) + "' in '" + std::string(ctx) + "'",
            std::string(key), std::string(ctx));
  const auto s = scalar_as<std::string>(n, key, ctx);
  auto v = parse(s);
  if (!v)
    fail_at(n, InputError::Kind::syntax,
            "invalid " + std::string(key) + " '" + s + "' in '" + std::string(ctx) +
                "' (expected " + std::string(allowed) + ")",
            s, std::string(ctx));
  return *v;
}

inline YAML::Node sequence(const YAML::Node& root, std::string_view key) {
  const YAML::Node n = root[std::string(key)];
  if (!n || n.IsNull()) return YAML::Node(YAML::NodeType::Sequence);
  if (!n.IsSequence())
    fail_at(n, InputError::Kind::syntax, "section '" + std::string(key) + "' must be a list");
  return n;
}

inline std::string record_id(const YAML::Node& rec, std::string_view section) {
  if (!rec.IsMap())
    fail_at(rec, InputError::Kind::syntax,
            "entries of '" + std::string(section) + "' must be mappings");
  return required<std::string>(rec, "id", section);
}

/// Inverter control mapping (`mode`, `pf`, `p_limit`, `q_setpoint`).
InverterControl parse_control(const YAML::Node& rec, const std::string& ctx);

}  // namespace tdsec::detail
