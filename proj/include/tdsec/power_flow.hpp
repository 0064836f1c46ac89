#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "tdsec/commands.hpp"
#include "tdsec/grid_model.hpp"
#include "tdsec/profiles.hpp"

namespace tdsec {

struct SolverConfig {
  double bfs_tolerance = 1e-8;
  int bfs_max_iterations = 100;
  double nr_tolerance = 1e-8;
  int nr_max_iterations = 20;
  double boundary_tolerance = 1e-6;
  int boundary_max_iterations = 10;

  /// Throws InputError(invariant) on non-positive tolerances or caps.
  void validate() const;
};

struct InverterOutput {
  double p_w = 0.0;
  double q_var = 0.0;
};

/// Operating-mode dispatch clipped to the rating circle.
InverterOutput inverter_injection(const Inverter& inv, const InverterControl& control,
                                  double available_p);
inline InverterOutput inverter_injection(const Inverter& inv, double available_p) {
  return inverter_injection(inv, inv.control, available_p);
}

// ---------------------------------------------------------------------------
// Distribution: backward-forward sweep

/// Rooted tree in parent-before-child order; node 0 is the root.
struct RadialFeeder {
  std::string name;
  std::vector<std::size_t> buses;   ///< network bus per node
  std::vector<std::size_t> parent;  ///< parent node; parent[0] == 0
  std::vector<Complex> z_pu;        ///< impedance of the edge to the parent
  std::vector<std::size_t> branch;  ///< network branch of that edge

  std::size_t size() const { return buses.size(); }
};

/// Tree of closed branches reachable from `root` through buses with
/// `allowed[bus]`. Throws SolverError when a cycle is met.
RadialFeeder build_radial(const Network& net, std::size_t root,
                          const std::vector<SwitchState>& states, const std::vector<bool>& allowed,
                          std::string name = {});

struct FeederSolution {
  std::vector<Complex> voltages;  ///< per node, per unit
  std::vector<Complex> currents;  ///< per node: parent -> node, per unit
  /// Complex power the root supplies into the tree, per unit.
  Complex head_injection;
  int iterations = 0;
  /// Largest voltage inconsistency after the final sweep.
  double mismatch = 0.0;
};

/// `injections` is per node, generation positive, constant power. The
/// root's own injection is netted into head_injection.
FeederSolution solve_feeder(const RadialFeeder& feeder, Complex head_voltage,
                            std::span<const Complex> injections, const SolverConfig& cfg);

// ---------------------------------------------------------------------------
// Transmission: Newton-Raphson, polar form

struct TransmissionSystem {
  std::vector<std::size_t> buses;  ///< network bus per local index
  std::size_t slack = 0;           ///< local index
  Complex slack_voltage{1.0, 0.0};
  Eigen::MatrixXcd admittance;  ///< series-only bus admittance, per unit
};

TransmissionSystem build_transmission(const Network& net, const std::vector<SwitchState>& states,
                                      const std::vector<bool>& include);

struct TransmissionSolution {
  std::vector<Complex> voltages;
  Complex slack_injection;
  int iterations = 0;
  std::vector<double> trace;  ///< max |mismatch| per iteration
};

/// All non-slack buses are PQ; `injections` is per local bus, generation
/// positive (the slack entry is ignored). Flat start.
TransmissionSolution solve_transmission(const TransmissionSystem& sys,
                                        std::span<const Complex> injections,
                                        const SolverConfig& cfg);

// ---------------------------------------------------------------------------
// Integrated solve and time series

struct InverterInjection {
  double p_w = 0.0;
  double q_var = 0.0;
  bool grid_forming = false;

  bool operator==(const InverterInjection&) const = default;
};

struct SystemSolution {
  std::size_t timestep = 0;
  double time_s = 0.0;
  bool converged = true;
  std::string failure;

  std::vector<Complex> bus_voltage_pu;    ///< 0 exactly when de-energized
  std::vector<Complex> branch_current_a;  ///< from -> to, from-side amperes
  std::vector<InverterInjection> inverter_output;
  std::vector<SwitchState> device_states;
  std::vector<InverterControl> controls;
  std::vector<bool> energized;
  std::vector<bool> load_served;
  std::vector<double> load_demand_w;
  /// Forming inverter per energized island.
  std::vector<std::size_t> island_formers;
  Complex slack_injection_pu;
  double losses_pu = 0.0;
  int boundary_iterations = 0;
};

struct Timeline {
  double horizon = 0.0;
  double step = 0.0;
  std::vector<SystemSolution> steps;

  std::size_t failed_steps() const;
  /// Index of the step containing time t (clamped to the last step).
  std::size_t step_at(double t) const;
};

struct RunSettings {
  double horizon = 86400.0;
  double step = 900.0;

  std::size_t steps() const;
  /// Throws InputError(invariant) unless step > 0 and divides horizon.
  void validate() const;
};

/// Throws SolverError; reports which subsystem failed.
SystemSolution solve_integrated(const Network& net, const std::vector<SwitchState>& states,
                                const std::vector<InverterControl>& controls,
                                const OperatingPoint& op, const SolverConfig& cfg);

/// Current device states and configured controls at time t.
SystemSolution solve_integrated(const Network& net, const ProfileSet& profiles, double t,
                                const SolverConfig& cfg);

/// Applies each command before solving the step containing its
/// effective_time; a failing step is recorded and the run continues.
Timeline time_series_run(const Network& net, const ProfileSet& profiles, const RunSettings& run,
                         const CommandStream& commands, const SolverConfig& cfg);

/// slack P + inverter P - served load P - I^2 R losses, per unit.
double power_balance_residual(const Network& net, const SystemSolution& sol);

}  // namespace tdsec
