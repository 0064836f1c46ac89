#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "tdsec/attack.hpp"
#include "tdsec/grid_model.hpp"
#include "tdsec/profiles.hpp"

namespace tdsec::test {

inline std::string data_path(std::string_view rel) {
  return std::string(TDSEC_DATA_DIR) + "/" + std::string(rel);
}

struct Fixture {
  Network net;
  ProfileSet profiles;
};

/// Loads a network file and the profiles next to it.
inline Fixture load_fixture(std::string_view rel) {
  const auto path = data_path(rel);
  Network net = load_network(path);
  ProfileSet p = load_profiles(net, std::filesystem::path(path).parent_path().string());
  return {std::move(net), std::move(p)};
}

inline Fixture demo() { return load_fixture("demo/network.yaml"); }
inline ScenarioFile demo_scenarios() { return load_scenarios(data_path("demo/scenarios.yaml")); }

inline constexpr const char* small_fixtures[] = {"fixtures/minimal.yaml", "fixtures/radial5.yaml",
                                                 "fixtures/mesh6.yaml"};

}  // namespace tdsec::test
