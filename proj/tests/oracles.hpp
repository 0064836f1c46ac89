#pragma once

// Reference computations written independently of the library solvers.
// They read the raw network records (ohms, volts, watts) and never call
// into the power-flow code.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "tdsec/grid_model.hpp"

namespace tdsec::oracle {

using cd = std::complex<double>;

/// Tail voltage of a head-fed two-bus line by the closed form. With
/// x = |V2|^2 the nodal equation reduces to
/// x^2 + (2(PR + QX) - 1) x + |S|^2 |z|^2 = 0 and V2 = x + conj(z) S.
inline cd two_bus_tail(cd z, cd s_load) {
  const double p = s_load.real(), q = s_load.imag(), r = z.real(), xx = z.imag();
  const double b = 2.0 * (p * r + q * xx) - 1.0;
  const double c = std::norm(s_load) * std::norm(z);
  const double x = (-b + std::sqrt(b * b - 4.0 * c)) / 2.0;
  return x + std::conj(z) * s_load;
}

struct NodalResult {
  std::vector<cd> v;  ///< per network bus, per unit
  cd slack_s;         ///< per unit, generation positive
  double losses = 0.0;
  int iterations = 0;
};

/// Dense fixed-point solve V_L = Y_LL^-1 (conj(S_L / V_L) - Y_Ls V_s) over
/// every bus, all devices closed. Inverters run at their configured
/// power factor without rating limits; P is clipped to p_limit if given.
inline NodalResult dense_nodal(const NetworkData& d, const std::vector<double>& load_w,
                               const std::vector<double>& inverter_w, double tol = 1e-14,
                               int max_iter = 500) {
  const std::size_t n = d.buses.size();
  std::map<std::string, std::size_t> ix;
  for (std::size_t i = 0; i < n; ++i) ix[d.buses[i].id] = i;
  const double sb = d.base_power_va;

  Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(n, n);
  for (const auto& br : d.branches) {
    const auto f = ix.at(br.from_bus), t = ix.at(br.to_bus);
    const double vb = d.buses[f].nominal_voltage;
    const cd z = br.impedance_ohm / (vb * vb / sb);
    const cd yy = 1.0 / z;
    y(f, f) += yy;
    y(t, t) += yy;
    y(f, t) -= yy;
    y(t, f) -= yy;
  }

  std::vector<cd> s(n);
  for (std::size_t l = 0; l < d.loads.size(); ++l) {
    const auto& ld = d.loads[l];
    const double p = load_w[l] / sb;
    const double q = p * std::tan(std::acos(ld.power_factor));
    s[ix.at(ld.bus_id)] -= cd(p, q);
  }
  for (std::size_t i = 0; i < d.inverters.size(); ++i) {
    const auto& inv = d.inverters[i];
    double p = inverter_w[i];
    if (inv.control.p_limit) p = std::min(p, *inv.control.p_limit);
    const double pf = inv.control.pf_setpoint;
    const double q = p * std::tan(std::acos(std::abs(pf))) * (pf < 0 ? -1.0 : 1.0);
    s[ix.at(inv.bus_id)] += cd(p, q) / sb;
  }

  const std::size_t sl = ix.at(d.slack_bus);
  std::vector<std::size_t> others;
  for (std::size_t i = 0; i < n; ++i)
    if (i != sl) others.push_back(i);
  const auto m = static_cast<Eigen::Index>(others.size());
  Eigen::MatrixXcd yll(m, m);
  Eigen::VectorXcd yls(m);
  for (Eigen::Index a = 0; a < m; ++a) {
    yls(a) = y(others[a], sl);
    for (Eigen::Index b = 0; b < m; ++b) yll(a, b) = y(others[a], others[b]);
  }
  const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(yll);
  const cd vs(d.slack_voltage_pu, 0.0);
  Eigen::VectorXcd vl = Eigen::VectorXcd::Constant(m, vs);

  NodalResult r;
  for (r.iterations = 1; r.iterations <= max_iter; ++r.iterations) {
    Eigen::VectorXcd rhs(m);
    for (Eigen::Index a = 0; a < m; ++a) rhs(a) = std::conj(s[others[a]] / vl(a)) - yls(a) * vs;
    const Eigen::VectorXcd next = lu.solve(rhs);
    const double change = (next - vl).cwiseAbs().maxCoeff();
    vl = next;
    if (change < tol) break;
  }
  r.v.assign(n, cd{});
  r.v[sl] = vs;
  for (Eigen::Index a = 0; a < m; ++a) r.v[others[a]] = vl(a);

  cd i_s = 0.0;
  for (std::size_t k = 0; k < n; ++k) i_s += y(sl, k) * r.v[k];
  r.slack_s = vs * std::conj(i_s) - s[sl];
  for (const auto& br : d.branches) {
    const auto f = ix.at(br.from_bus), t = ix.at(br.to_bus);
    const double vb = d.buses[f].nominal_voltage;
    const cd z = br.impedance_ohm / (vb * vb / sb);
    r.losses += std::norm((r.v[f] - r.v[t]) / z) * z.real();
  }
  return r;
}

/// Integer start times s in [0, horizon - d] whose event [s, s + d) holds
/// no sample instant.
inline std::set<long> brute_force_stealth_starts(const std::vector<double>& samples, long d,
                                                 long horizon) {
  std::set<long> ok;
  for (long s = 0; s + d <= horizon; ++s) {
    bool seen = false;
    for (double p : samples)
      if (p >= static_cast<double>(s) && p < static_cast<double>(s + d)) {
        seen = true;
        break;
      }
    if (!seen) ok.insert(s);
  }
  return ok;
}

}  // namespace tdsec::oracle
