#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "tdsec/grid_model.hpp"

namespace tdsec {

/// Piecewise-constant series read from a `time_s,value` CSV.
struct Profile {
  std::string id;
  std::vector<double> time_s;  ///< strictly increasing, starts at 0
  std::vector<double> value;

  /// Value of the last sample with time_s <= t.
  double at(double t) const;
  double last_time() const { return time_s.empty() ? 0.0 : time_s.back(); }
};

using ProfileSet = std::map<std::string, Profile, std::less<>>;

Profile parse_profile_csv(std::string_view text, std::string id);

/// Loads every entry of the network's profiles_ref, resolving paths
/// against `directory`. Checks the inverter available-power bound.
ProfileSet load_profiles(const Network& net, const std::string& directory);

/// Throws InputError if any referenced profile is missing or does not
/// cover the horizon. The last row counts for one sample spacing; a
/// single-row profile is constant.
void check_profile_coverage(const Network& net, const ProfileSet& profiles,
                            double horizon, double step);

/// Load demand and inverter availability at one instant.
struct OperatingPoint {
  std::vector<double> load_demand_w;
  std::vector<double> inverter_available_w;

  bool operator==(const OperatingPoint&) const = default;
};

OperatingPoint operating_point(const Network& net, const ProfileSet& profiles, double t);

}  // namespace tdsec
