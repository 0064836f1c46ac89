#include "tdsec/profiles.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <sstream>

#include "tdsec/errors.hpp"
#include "yaml_util.hpp"

namespace tdsec {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

double Profile::at(double t) const {
  auto it = std::upper_bound(time_s.begin(), time_s.end(), t);
  if (it == time_s.begin()) return value.empty() ? 0.0 : value.front();
  return value[static_cast<std::size_t>(std::distance(time_s.begin(), it)) - 1];
}

Profile parse_profile_csv(std::string_view text, std::string id) {
  Profile p;
  p.id = std::move(id);
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    const auto row = trim(line);
    if (row.empty() || row.front() == '#') continue;
    if (!header) {
      if (row != "time_s,value")
        throw InputError(InputError::Kind::syntax,
                         "profile '" + p.id + "': expected header 'time_s,value'", p.id, p.id,
                         lineno, 1);
      header = true;
      continue;
    }
    const auto comma = row.find(',');
    double t = 0.0, v = 0.0;
    if (comma == std::string_view::npos || !parse_double(row.substr(0, comma), t) ||
        !parse_double(row.substr(comma + 1), v))
      throw InputError(InputError::Kind::syntax, "profile '" + p.id + "': malformed row", p.id, p.id,
                       lineno, 1);
    if (!p.time_s.empty() && !(t > p.time_s.back()))
      throw InputError(InputError::Kind::invariant,
                       "profile '" + p.id + "': time_s must be strictly increasing", p.id, p.id,
                       lineno, 1);
    if (!std::isfinite(v))
      throw InputError(InputError::Kind::invariant, "profile '" + p.id + "': non-finite value",
                       p.id, p.id, lineno, 1);
    p.time_s.push_back(t);
    p.value.push_back(v);
  }
  if (!header) throw InputError(InputError::Kind::syntax, "profile '" + p.id + "': empty file", p.id);
  if (p.time_s.empty() || p.time_s.front() != 0.0)
    throw InputError(InputError::Kind::invariant, "profile '" + p.id + "': must start at time_s 0",
                     p.id, p.id);
  return p;
}

ProfileSet load_profiles(const Network& net, const std::string& directory) {
  ProfileSet set;
  const std::filesystem::path dir(directory);
  for (const auto& [id, rel] : net.data().profiles_ref) {
    const auto path = (dir / rel).string();
    set.emplace(id, parse_profile_csv(detail::read_text_file(path), id));
  }
  for (const auto& inv : net.inverters()) {
    const auto& p = set.at(inv.profile_id);
    for (double v : p.value) {
      const double avail = inv.scale * v;
      if (avail < 0.0 || avail > inv.s_rated * (1.0 + 1e-12))
        throw InputError(InputError::Kind::invariant,
                         "inverter '" + inv.id + "': available power " + std::to_string(avail) +
                             " W outside [0, s_rated]",
                         inv.profile_id, inv.id);
    }
  }
  for (const auto& l : net.loads())
    for (double v : set.at(l.profile_id).value)
      if (l.scale * v < 0.0)
        throw InputError(InputError::Kind::invariant, "load '" + l.id + "': negative demand",
                         l.profile_id, l.id);
  return set;
}

void check_profile_coverage(const Network& net, const ProfileSet& profiles, double horizon,
                            [[maybe_unused]] double step) {
  auto check = [&](const std::string& pid, const std::string& owner) {
    auto it = profiles.find(pid);
    if (it == profiles.end())
      throw InputError(InputError::Kind::dangling_reference,
                       "'" + owner + "' references unknown profile '" + pid + "'", pid, owner);
    const auto& ts = it->second.time_s;
    // The last row holds for one sample spacing.
    if (ts.size() < 2) return;
    const double end = 2.0 * ts.back() - ts[ts.size() - 2];
    if (end < horizon - 1e-9)
      throw InputError(InputError::Kind::invariant,
                       "profile '" + pid + "' covers up to " + std::to_string(end) +
                           " s, short of the horizon " + std::to_string(horizon) + " s",
                       pid, owner);
  };
  for (const auto& l : net.loads()) check(l.profile_id, l.id);
  for (const auto& inv : net.inverters()) check(inv.profile_id, inv.id);
}

OperatingPoint operating_point(const Network& net, const ProfileSet& profiles, double t) {
  OperatingPoint op;
  op.load_demand_w.reserve(net.loads().size());
  for (const auto& l : net.loads()) op.load_demand_w.push_back(l.scale * profiles.at(l.profile_id).at(t));
  op.inverter_available_w.reserve(net.inverters().size());
  for (const auto& inv : net.inverters()) {
    const double avail = inv.scale * profiles.at(inv.profile_id).at(t);
    op.inverter_available_w.push_back(std::clamp(avail, 0.0, inv.s_rated));
  }
  return op;
}

}  // namespace tdsec
