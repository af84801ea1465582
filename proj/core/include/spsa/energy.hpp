#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spsa/types.hpp"

namespace spsa {

/// Power evacuated from storage to realize actuation power P_e at stored
/// energy E_s (maximal-recharge root):
///   P_s = E_s/tau_r - sqrt((E_s/tau_r)^2 - (2/tau_r) E_s P_e)
/// evaluated in the cancellation-free form 2 P_e / (1 + sqrt(1 - 2 tau_r P_e / E_s)),
/// which returns the exact limits P_s = P_e at tau_r = 0 and P_s = E_s/tau_r at
/// the choke boundary P_e = E_s/(2 tau_r). tau_r = inf requires P_e <= 0 and
/// gives P_s = 0 (storage decoupled).
/// Throws ChokeError when P_e exceeds E_s/(2 tau_r).
double storage_power(double E_s, double P_e, const LossParams& loss);

/// Sampled multichannel port-voltage signal; strictly increasing times,
/// linear interpolation between samples.
struct Signal {
  std::vector<double> t;
  std::vector<VectorXd> v;

  int ports() const { return v.empty() ? 0 : static_cast<int>(v.front().size()); }
  double t_end() const { return t.empty() ? 0.0 : t.back(); }
  VectorXd at(double time) const;
  void validate() const;
};

Signal sine_signal(int ports, double amp, double omega, double t_end, double dt,
                   double phase_step = 0.7853981633974483);
/// Band-limited noise: sum of 32 sinusoids with seeded random frequencies in
/// [0.05, 1] * omega_max and random phases; reproducible from the seed.
Signal noise_signal(int ports, double amp, double omega_max, double t_end, double dt,
                    std::uint64_t seed);

struct ChokeRecord {
  double time;
  double energy;  // E_s at the event
  double power;   // P_e at the event
};

/// Sampled output of the storage-ODE oracle.
struct EnergyTrajectory {
  std::vector<double> t;
  std::vector<double> E_s;
  std::vector<double> P_e;
  std::vector<double> P_s;
  std::vector<double> P_d;
  std::vector<double> u_s;
  std::vector<double> v_s;
  std::optional<ChokeRecord> choke;

  std::size_t size() const { return t.size(); }
};

/// Joint fixed-step fourth-order integration of the controller state and the
/// storage energy dE_s/dt = -(2/tau_s) E_s - P_s(E_s, P_e). Step error is
/// monitored by step doubling (StepTooLarge above 1e-4 relative); the choke
/// event P_e > E_s/(2 tau_r) is located by sign check plus bisection to 1e-9 s
/// and recorded, terminating the run. x(0) = 0 (zero input history).
EnergyTrajectory simulate(const LtiAdmittance& sys, const Signal& v, double E_s0,
                          const LossParams& loss, double dt);
EnergyTrajectory simulate(const LtvAdmittanceGrid& sys, const Signal& v, double E_s0,
                          const LossParams& loss, double dt);

Signal read_signal_csv(const std::string& path);
void write_trajectory_csv(const std::string& path, const EnergyTrajectory& traj);

/// P_s vs P_e curve at fixed stored energy (Fig-4-style plot data):
/// P_e swept over [pe_lo, E_s/(2 tau_r)], one (P_e, P_s) row per point.
void write_ps_curve_csv(const std::string& path, double E_s, const LossParams& loss,
                        int points = 200, double pe_lo = 0.0);

}  // namespace spsa
