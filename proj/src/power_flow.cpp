#include "tdsec/power_flow.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "tdsec/errors.hpp"
#include "tdsec/topology.hpp"

namespace tdsec {

namespace {

constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

Complex load_power_pu(const Load& l, double demand_w, double base) {
  const double q = demand_w * std::tan(std::acos(l.power_factor));
  return Complex(demand_w, q) / base;
}

}  // namespace

void SolverConfig::validate() const {
  if (!(bfs_tolerance > 0 && nr_tolerance > 0 && boundary_tolerance > 0) ||
      bfs_max_iterations < 1 || nr_max_iterations < 1 || boundary_max_iterations < 1)
    throw InputError(InputError::Kind::invariant,
                     "solver tolerances must be > 0 and iteration caps >= 1");
}

InverterOutput inverter_injection(const Inverter& inv, const InverterControl& c,
                                  double available_p) {
  const double s = inv.s_rated;
  const double avail = std::clamp(available_p, 0.0, s);
  const double cap = c.p_limit ? std::min(avail, std::max(0.0, *c.p_limit)) : avail;
  InverterOutput out;
  switch (c.mode) {
    case InverterMode::constant_pf: {
      const double pf = c.pf_setpoint;
      double p = cap;
      double q = p * std::tan(std::acos(std::min(1.0, std::abs(pf)))) * (pf < 0 ? -1.0 : 1.0);
      if (p * p + q * q > s * s) {
        // Give up reactive power first, then active power.
        if (p >= s) {
          p = s;
          q = 0.0;
        } else {
          q = std::copysign(std::sqrt(s * s - p * p), q);
        }
      }
      out = {p, q};
      break;
    }
    case InverterMode::limit_p:
      out = {cap, 0.0};
      break;
    case InverterMode::constant_q: {
      const double q = std::clamp(c.q_setpoint, -s, s);
      out = {std::min(cap, std::sqrt(std::max(0.0, s * s - q * q))), q};
      break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

RadialFeeder build_radial(const Network& net, std::size_t root,
                          const std::vector<SwitchState>& states, const std::vector<bool>& allowed,
                          std::string name) {
  RadialFeeder f;
  f.name = std::move(name);
  std::vector<std::size_t> node_of(net.buses().size(), npos);
  f.buses.push_back(root);
  f.parent.push_back(0);
  f.z_pu.push_back({});
  f.branch.push_back(npos);
  node_of[root] = 0;
  for (std::size_t head = 0; head < f.buses.size(); ++head) {
    const auto u = f.buses[head];
    for (auto k : net.incident(u)) {
      if (k == f.branch[head] || !net.closed(k, states)) continue;
      const auto v = net.from_bus(k) == u ? net.to_bus(k) : net.from_bus(k);
      if (!allowed[v]) continue;
      if (node_of[v] != npos)
        throw SolverError("feeder '" + f.name + "' is not radial: branch '" +
                              net.branches()[k].id + "' closes a loop",
                          {}, f.name);
      node_of[v] = f.buses.size();
      f.buses.push_back(v);
      f.parent.push_back(head);
      f.z_pu.push_back(net.impedance_pu(k));
      f.branch.push_back(k);
    }
  }
  return f;
}

FeederSolution solve_feeder(const RadialFeeder& feeder, Complex head_voltage,
                            std::span<const Complex> injections, const SolverConfig& cfg) {
  const std::size_t n = feeder.size();
  FeederSolution sol;
  sol.voltages.assign(n, head_voltage);
  sol.currents.assign(n, Complex{});
  std::vector<Complex> acc(n);

  auto backward = [&](const std::vector<Complex>& v) {
    for (std::size_t k = 0; k < n; ++k)
      acc[k] = k == 0 ? Complex{} : -std::conj(injections[k] / v[k]);
    for (std::size_t k = n; k-- > 1;) {
      sol.currents[k] = acc[k];
      acc[feeder.parent[k]] += acc[k];
    }
  };

  std::vector<Complex> next(n);
  double delta = std::numeric_limits<double>::infinity();
  std::size_t worst = 0;
  int it = 0;
  while (it < cfg.bfs_max_iterations) {
    ++it;
    backward(sol.voltages);
    next[0] = head_voltage;
    delta = 0.0;
    for (std::size_t k = 1; k < n; ++k) {
      next[k] = next[feeder.parent[k]] - feeder.z_pu[k] * sol.currents[k];
      const double d = std::abs(next[k] - sol.voltages[k]);
      if (!(d <= delta)) {  // also catches NaN
        delta = d;
        worst = k;
      }
    }
    sol.voltages.swap(next);
    if (!std::isfinite(delta)) break;
    if (delta < cfg.bfs_tolerance) break;
  }
  if (!(delta < cfg.bfs_tolerance)) {
    throw SolverError("feeder '" + feeder.name + "': sweep did not converge after " +
                          std::to_string(it) + " iterations (worst mismatch " +
                          std::to_string(delta) + " p.u. at node " + std::to_string(worst) + ")",
                      {delta}, feeder.name);
  }
  backward(sol.voltages);
  sol.mismatch = 0.0;
  for (std::size_t k = 1; k < n; ++k)
    sol.mismatch = std::max(sol.mismatch, std::abs(sol.voltages[feeder.parent[k]] -
                                                   feeder.z_pu[k] * sol.currents[k] -
                                                   sol.voltages[k]));
  sol.head_injection = sol.voltages[0] * std::conj(acc[0]) - (n ? injections[0] : Complex{});
  sol.iterations = it;
  return sol;
}

// ---------------------------------------------------------------------------

TransmissionSystem build_transmission(const Network& net, const std::vector<SwitchState>& states,
                                      const std::vector<bool>& include) {
  TransmissionSystem sys;
  std::vector<std::size_t> local(net.buses().size(), npos);
  for (std::size_t b = 0; b < net.buses().size(); ++b) {
    if (!include[b] || net.buses()[b].kind != BusKind::transmission) continue;
    local[b] = sys.buses.size();
    sys.buses.push_back(b);
  }
  if (local[net.slack()] == npos) throw SolverError("slack bus is not part of the transmission system");
  sys.slack = local[net.slack()];
  sys.slack_voltage = Complex(net.data().slack_voltage_pu, 0.0);
  const auto n = static_cast<Eigen::Index>(sys.buses.size());
  sys.admittance = Eigen::MatrixXcd::Zero(n, n);
  for (std::size_t k = 0; k < net.branches().size(); ++k) {
    const auto f = local[net.from_bus(k)];
    const auto t = local[net.to_bus(k)];
    if (f == npos || t == npos || !net.closed(k, states)) continue;
    const Complex y = 1.0 / net.impedance_pu(k);
    const auto fi = static_cast<Eigen::Index>(f), ti = static_cast<Eigen::Index>(t);
    sys.admittance(fi, fi) += y;
    sys.admittance(ti, ti) += y;
    sys.admittance(fi, ti) -= y;
    sys.admittance(ti, fi) -= y;
  }
  return sys;
}

TransmissionSolution solve_transmission(const TransmissionSystem& sys,
                                        std::span<const Complex> injections,
                                        const SolverConfig& cfg) {
  const auto n = static_cast<Eigen::Index>(sys.buses.size());
  const auto s = static_cast<Eigen::Index>(sys.slack);
  Eigen::VectorXcd v = Eigen::VectorXcd::Constant(n, Complex(1.0, 0.0));
  v(s) = sys.slack_voltage;
  Eigen::VectorXd va = v.array().arg(), vm = v.array().abs();

  std::vector<Eigen::Index> pq;
  for (Eigen::Index i = 0; i < n; ++i)
    if (i != s) pq.push_back(i);
  const auto m = static_cast<Eigen::Index>(pq.size());

  TransmissionSolution sol;
  const Eigen::MatrixXcd& y = sys.admittance;
  for (int it = 0;; ++it) {
    const Eigen::VectorXcd ibus = y * v;
    const Eigen::VectorXcd scalc = v.cwiseProduct(ibus.conjugate());
    Eigen::VectorXd f(2 * m);
    for (Eigen::Index r = 0; r < m; ++r) {
      const Complex mis = scalc(pq[r]) - injections[static_cast<std::size_t>(pq[r])];
      f(r) = mis.real();
      f(m + r) = mis.imag();
    }
    const double norm = m ? f.cwiseAbs().maxCoeff() : 0.0;
    sol.trace.push_back(norm);
    if (!std::isfinite(norm))
      throw SolverError("transmission Newton-Raphson diverged", sol.trace, "transmission");
    if (norm < cfg.nr_tolerance) {
      sol.iterations = it;
      break;
    }
    if (it >= cfg.nr_max_iterations)
      throw SolverError("transmission Newton-Raphson did not converge after " +
                            std::to_string(it) + " iterations (mismatch " + std::to_string(norm) +
                            " p.u.)",
                        sol.trace, "transmission");

    // Complex-form partial derivatives of bus injections.
    const Eigen::VectorXcd vnorm = v.array() / vm.array().cast<Complex>();
    const Eigen::MatrixXcd dva =
        Complex(0, 1) * v.asDiagonal() *
        (Eigen::MatrixXcd(ibus.asDiagonal()) - y * v.asDiagonal()).conjugate();
    const Eigen::MatrixXcd dvm = Eigen::MatrixXcd(v.asDiagonal()) * (y * vnorm.asDiagonal()).conjugate() +
                                 Eigen::MatrixXcd(ibus.conjugate().asDiagonal()) * vnorm.asDiagonal();
    Eigen::MatrixXd jac(2 * m, 2 * m);
    for (Eigen::Index r = 0; r < m; ++r)
      for (Eigen::Index c = 0; c < m; ++c) {
        jac(r, c) = dva(pq[r], pq[c]).real();
        jac(r, m + c) = dvm(pq[r], pq[c]).real();
        jac(m + r, c) = dva(pq[r], pq[c]).imag();
        jac(m + r, m + c) = dvm(pq[r], pq[c]).imag();
      }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(jac);
    if (!lu.isInvertible())
      throw SolverError("transmission Jacobian is singular", sol.trace, "transmission");
    const Eigen::VectorXd dx = lu.solve(-f);
    for (Eigen::Index r = 0; r < m; ++r) {
      va(pq[r]) += dx(r);
      vm(pq[r]) += dx(m + r);
    }
    for (Eigen::Index i = 0; i < n; ++i) v(i) = std::polar(vm(i), va(i));
  }

  sol.voltages.assign(v.data(), v.data() + n);
  const Complex ss = v(s) * std::conj((y.row(s) * v)(0));
  sol.slack_injection = ss - injections[static_cast<std::size_t>(s)];
  return sol;
}

// ---------------------------------------------------------------------------

std::size_t Timeline::failed_steps() const {
  return static_cast<std::size_t>(
      std::count_if(steps.begin(), steps.end(), [](const SystemSolution& s) { return !s.converged; }));
}

std::size_t Timeline::step_at(double t) const {
  if (steps.empty()) return 0;
  if (t <= 0.0) return 0;
  const auto k = static_cast<std::size_t>(std::floor(t / step));
  return std::min(k, steps.size() - 1);
}

std::size_t RunSettings::steps() const {
  return static_cast<std::size_t>(std::llround(horizon / step));
}

void RunSettings::validate() const {
  if (!(step > 0.0) || !(horizon > 0.0))
    throw InputError(InputError::Kind::invariant, "horizon and step must be > 0");
  const double n = horizon / step;
  if (std::abs(n - std::round(n)) > 1e-9)
    throw InputError(InputError::Kind::invariant, "horizon must be a multiple of step");
}

SystemSolution solve_integrated(const Network& net, const std::vector<SwitchState>& states,
                                const std::vector<InverterControl>& controls,
                                const OperatingPoint& op, const SolverConfig& cfg) {
  const std::size_t nbus = net.buses().size();
  const double base = net.base_power();
  const TopologyReport topo = analyze_topology(net, states, op);

  SystemSolution sol;
  sol.device_states = states;
  sol.controls = controls;
  sol.energized = topo.energized;
  sol.load_demand_w = op.load_demand_w;
  sol.bus_voltage_pu.assign(nbus, Complex{});
  sol.branch_current_a.assign(net.branches().size(), Complex{});
  sol.inverter_output.assign(net.inverters().size(), {});
  sol.load_served.assign(net.loads().size(), false);

  // Specified injections, generation positive.
  std::vector<Complex> spec(nbus);
  for (std::size_t l = 0; l < net.loads().size(); ++l) {
    const auto b = net.load_bus(l);
    if (!topo.energized[b]) continue;
    sol.load_served[l] = true;
    spec[b] -= load_power_pu(net.loads()[l], op.load_demand_w[l], base);
  }
  std::vector<bool> forming(net.inverters().size(), false);
  for (const auto& isl : topo.islands)
    if (isl.energized) forming[*isl.forming_inverter] = true;
  for (std::size_t i = 0; i < net.inverters().size(); ++i) {
    const auto b = net.inverter_bus(i);
    if (!topo.energized[b] || forming[i]) continue;
    const auto out = inverter_injection(net.inverters()[i], controls[i], op.inverter_available_w[i]);
    sol.inverter_output[i] = {out.p_w, out.q_var, false};
    spec[b] += Complex(out.p_w, out.q_var) / base;
  }

  auto node_injections = [&](const RadialFeeder& tree, bool include_root) {
    std::vector<Complex> inj(tree.size());
    for (std::size_t k = 0; k < tree.size(); ++k)
      inj[k] = (k == 0 && !include_root) ? Complex{} : spec[tree.buses[k]];
    return inj;
  };

  // Grid-connected parts of the feeders.
  struct GridFeeder {
    RadialFeeder tree;
    std::vector<Complex> inj;
    FeederSolution result;
  };
  std::vector<GridFeeder> grid;
  for (const auto& f : net.feeders()) {
    if (!topo.grid_connected[f.root]) continue;
    std::vector<bool> mask(nbus, false);
    mask[f.root] = true;
    for (auto b : f.buses) mask[b] = topo.grid_connected[b];
    GridFeeder g;
    g.tree = build_radial(net, f.root, states, mask, f.id);
    if (g.tree.size() < 2) continue;
    g.inj = node_injections(g.tree, false);
    grid.push_back(std::move(g));
  }

  const TransmissionSystem tsys = build_transmission(net, states, topo.grid_connected);
  std::vector<std::size_t> local(nbus, npos);
  for (std::size_t i = 0; i < tsys.buses.size(); ++i) local[tsys.buses[i]] = i;

  std::vector<Complex> vt(tsys.buses.size(), Complex(1.0, 0.0));
  vt[tsys.slack] = tsys.slack_voltage;
  TransmissionSolution tsol;
  auto solve_feeders = [&]() {
    for (auto& g : grid) {
      try {
        g.result = solve_feeder(g.tree, vt[local[g.tree.buses[0]]], g.inj, cfg);
      } catch (const SolverError& e) {
        throw SolverError(e.what(), e.trace(), g.tree.name);
      }
    }
  };
  int outer = 0;
  for (;;) {
    ++outer;
    solve_feeders();
    std::vector<Complex> tinj(tsys.buses.size());
    for (std::size_t i = 0; i < tsys.buses.size(); ++i) tinj[i] = spec[tsys.buses[i]];
    for (const auto& g : grid) tinj[local[g.tree.buses[0]]] -= g.result.head_injection;
    tsol = solve_transmission(tsys, tinj, cfg);
    double delta = 0.0;
    for (const auto& g : grid) {
      const auto r = local[g.tree.buses[0]];
      delta = std::max(delta, std::abs(tsol.voltages[r] - vt[r]));
    }
    vt = tsol.voltages;
    if (delta < cfg.boundary_tolerance) break;
    if (outer >= cfg.boundary_max_iterations)
      throw SolverError("boundary iteration did not converge after " + std::to_string(outer) +
                            " iterations (change " + std::to_string(delta) + " p.u.)",
                        {delta}, "boundary");
  }
  solve_feeders();
  sol.boundary_iterations = outer;
  sol.slack_injection_pu = tsol.slack_injection;

  auto store_tree = [&](const RadialFeeder& tree, const FeederSolution& fs) {
    for (std::size_t k = 0; k < tree.size(); ++k) {
      sol.bus_voltage_pu[tree.buses[k]] = fs.voltages[k];
      if (k == 0) continue;
      const auto br = tree.branch[k];
      const Complex i_pu = net.from_bus(br) == tree.buses[tree.parent[k]] ? fs.currents[k] : -fs.currents[k];
      sol.branch_current_a[br] = i_pu * net.current_base(br);
      sol.losses_pu += std::norm(fs.currents[k]) * tree.z_pu[k].real();
    }
  };

  for (std::size_t i = 0; i < tsys.buses.size(); ++i) sol.bus_voltage_pu[tsys.buses[i]] = vt[i];
  for (std::size_t k = 0; k < net.branches().size(); ++k) {
    const auto f = local[net.from_bus(k)], t = local[net.to_bus(k)];
    if (f == npos || t == npos || !net.closed(k, states)) continue;
    const Complex i_pu = (vt[f] - vt[t]) / net.impedance_pu(k);
    sol.branch_current_a[k] = i_pu * net.current_base(k);
    sol.losses_pu += std::norm(i_pu) * net.impedance_pu(k).real();
  }
  for (const auto& g : grid) store_tree(g.tree, g.result);

  // Energized islands run on their largest inverter.
  for (const auto& isl : topo.islands) {
    if (!isl.energized) continue;
    const auto former = *isl.forming_inverter;
    std::vector<bool> mask(nbus, false);
    for (auto b : isl.buses) mask[b] = true;
    const auto tree = build_radial(net, net.inverter_bus(former), states, mask,
                                   "island@" + net.buses()[net.inverter_bus(former)].id);
    const auto inj = node_injections(tree, true);
    FeederSolution fs;
    try {
      fs = solve_feeder(tree, Complex(1.0, 0.0), inj, cfg);
    } catch (const SolverError& e) {
      throw SolverError(e.what(), e.trace(), tree.name);
    }
    store_tree(tree, fs);
    sol.inverter_output[former] = {fs.head_injection.real() * base, fs.head_injection.imag() * base, true};
    sol.island_formers.push_back(former);
  }
  return sol;
}

SystemSolution solve_integrated(const Network& net, const ProfileSet& profiles, double t,
                                const SolverConfig& cfg) {
  auto sol = solve_integrated(net, net.current_states(), net.initial_controls(),
                              operating_point(net, profiles, t), cfg);
  sol.time_s = t;
  return sol;
}

Timeline time_series_run(const Network& net, const ProfileSet& profiles, const RunSettings& run,
                         const CommandStream& commands, const SolverConfig& cfg) {
  run.validate();
  cfg.validate();
  validate_commands(net, commands);
  check_profile_coverage(net, profiles, run.horizon, run.step);

  Timeline tl;
  tl.horizon = run.horizon;
  tl.step = run.step;
  const std::size_t n = run.steps();
  tl.steps.reserve(n);

  auto states = net.current_states();
  auto controls = net.initial_controls();
  const auto order = delivery_order(commands);
  std::size_t next = 0;

  OperatingPoint last_op;
  bool have_last = false;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) * run.step;
    const double t_end = static_cast<double>(k + 1) * run.step;
    while (next < order.size() && commands[order[next]].effective_time < t_end) {
      const auto& c = commands[order[next++]];
      if (const auto* st = std::get_if<SwitchState>(&c.action))
        states[*net.find_device(c.target)] = *st;
      else
        controls[*net.find_inverter(c.target)] = std::get<InverterControl>(c.action);
    }
    OperatingPoint op = operating_point(net, profiles, t);

    SystemSolution sol;
    if (have_last && op == last_op && states == tl.steps.back().device_states &&
        controls == tl.steps.back().controls) {
      sol = tl.steps.back();
    } else {
      try {
        sol = solve_integrated(net, states, controls, op, cfg);
      } catch (const SolverError& e) {
        sol = SystemSolution{};
        sol.converged = false;
        sol.failure = (e.where().empty() ? std::string() : e.where() + ": ") + e.what();
        sol.device_states = states;
        sol.controls = controls;
        sol.load_demand_w = op.load_demand_w;
        sol.bus_voltage_pu.assign(net.buses().size(), Complex{});
        sol.branch_current_a.assign(net.branches().size(), Complex{});
        sol.inverter_output.assign(net.inverters().size(), {});
        sol.energized.assign(net.buses().size(), false);
        sol.load_served.assign(net.loads().size(), false);
      }
    }
    sol.timestep = k;
    sol.time_s = t;
    tl.steps.push_back(std::move(sol));
    last_op = std::move(op);
    have_last = true;
  }
  return tl;
}

double power_balance_residual(const Network& net, const SystemSolution& sol) {
  const double base = net.base_power();
  double p = sol.slack_injection_pu.real();
  for (const auto& inj : sol.inverter_output) p += inj.p_w / base;
  for (std::size_t l = 0; l < net.loads().size(); ++l)
    if (sol.load_served[l]) p -= sol.load_demand_w[l] / base;
  for (std::size_t k = 0; k < net.branches().size(); ++k) {
    const Complex i_pu = sol.branch_current_a[k] / net.current_base(k);
    p -= std::norm(i_pu) * net.impedance_pu(k).real();
  }
  return p;
}

}  // namespace tdsec
