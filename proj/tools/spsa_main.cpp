// spsa: feasibility analysis for self-powered synthetic admittances.
//
// Subcommands: check | pareto | simulate | fo | backbone.
// Exit codes: 0 completed analysis (an infeasible verdict is a result, not an
// error), 1 runtime failure, 2 invalid configuration or input schema.

#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "spsa/energy.hpp"
#include "spsa/errors.hpp"
#include "spsa/feas_lti.hpp"
#include "spsa/feas_ltv.hpp"
#include "spsa/fo.hpp"
#include "spsa/io_util.hpp"
#include "spsa/json_io.hpp"
#include "spsa/model.hpp"
#include "spsa/pareto.hpp"

namespace {

using nlohmann::json;
using namespace spsa;

double parse_tau(const std::string& s, const std::string& flag) {
  if (s == "inf" || s == "Inf" || s == "INF") return kInf;
  try {
    size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (...) {
    throw CLI::ValidationError(flag, "expected a number or 'inf'");
  }
}

std::vector<double> parse_list(const std::string& s, const std::string& flag) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(parse_tau(item, flag));
  }
  if (out.empty()) throw CLI::ValidationError(flag, "expected a comma-separated list");
  return out;
}

struct LossFlags {
  std::string loss_path;
  std::string R = "1";
  std::string tau_s = "inf";
  std::string tau_r = "0";
  double C_s = 1.0;

  void attach(CLI::App* cmd) {
    cmd->add_option("--loss", loss_path, "loss parameters JSON file");
    cmd->add_option("--R", R, "diagonal actuator resistances, comma-separated ohms");
    cmd->add_option("--tau-s", tau_s, "leakage time constant, seconds or 'inf'");
    cmd->add_option("--tau-r", tau_r, "transmission time constant, seconds or 'inf'");
    cmd->add_option("--C-s", C_s, "storage capacitance, farads");
  }

  LossParams resolve(CLI::App* cmd, int default_ports) const {
    if (!loss_path.empty() && !cmd->count("--R") && !cmd->count("--tau-s") &&
        !cmd->count("--tau-r") && !cmd->count("--C-s"))
      return load_loss_json(loss_path);
    LossParams loss;
    if (!loss_path.empty()) loss = load_loss_json(loss_path);
    if (cmd->count("--R") || loss_path.empty()) {
      const auto r = parse_list(R, "--R");
      VectorXd v(r.size());
      for (size_t i = 0; i < r.size(); ++i) v[i] = r[i];
      if (v.size() == 1 && default_ports > 1)
        v = VectorXd::Constant(default_ports, r[0]);
      loss.R = v;
    }
    if (cmd->count("--tau-s") || loss_path.empty()) loss.tau_s = parse_tau(tau_s, "--tau-s");
    if (cmd->count("--tau-r") || loss_path.empty()) loss.tau_r = parse_tau(tau_r, "--tau-r");
    if (cmd->count("--C-s")) loss.C_s = C_s;
    loss.validate();
    return loss;
  }

  json config() const {
    json c;
    c["loss_file"] = loss_path;
    c["R"] = R;
    c["tau_s"] = tau_s;
    c["tau_r"] = tau_r;
    c["C_s"] = C_s;
    return c;
  }
};

void emit(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-")
    std::cout << content << std::endl;
  else
    write_file_atomic(path, content);
}

int ports_of(const SystemVariant& sys) {
  if (const auto* a = std::get_if<LtiAdmittance>(&sys)) return a->ports();
  if (const auto* g = std::get_if<LtvAdmittanceGrid>(&sys)) return g->ports();
  return 1;
}

// ---------------------------------------------------------------------------

int run_check(const std::string& system_path, const LossFlags& lf, CLI::App* cmd,
              double tol, const std::string& out, const std::string& dump_lmi_path) {
  const SystemVariant sys = load_system_json(system_path);
  const LossParams loss = lf.resolve(cmd, ports_of(sys));
  json config = lf.config();
  config["command"] = "check";
  config["system_file"] = system_path;
  config["tol"] = tol;

  if (const auto* lti = std::get_if<LtiAdmittance>(&sys)) {
    if (!dump_lmi_path.empty()) {
      LmiProblem p = assemble_sufficient(*lti, loss, tol);
      p.finalize();
      emit(dump_lmi_path, lmi_to_json(p));
    }
    const FeasVerdict v = analyze(*lti, loss, tol);
    emit(out, verdict_to_json(sys, loss, v, config.dump()));
    return 0;
  }
  if (const auto* ltv = std::get_if<LtvAdmittanceGrid>(&sys)) {
    if (!dump_lmi_path.empty()) {
      LmiProblem p = assemble_ltv(*ltv, loss, FdScheme::CentralWithOneSidedEnds, tol);
      p.finalize();
      emit(dump_lmi_path, lmi_to_json(p));
    }
    const LtvVerdict v = check_ltv(*ltv, loss, tol);
    emit(out, verdict_to_json(sys, loss, v, config.dump()));
    return 0;
  }
  // fractional-order: feasibility at the given loss point via the inner search
  const auto& f = std::get<FoLeadLag>(sys);
  if (loss.ports() != 1)
    throw InvalidParameter("fo systems are SISO: R must have one entry");
  const FoMaxResult mr = fo_max_tau_r(f, loss.R[0], loss.tau_s);
  json j;
  j["tool"] = "spsa";
  j["version"] = kToolVersion;
  j["config"] = config;
  j["system"] = json::parse(system_to_json(sys));
  j["loss"] = json::parse(loss_to_json(loss));
  j["tau_r_max"] = mr.tau_r;
  j["tau_r_max_status"] = to_string(mr.status);
  bool feasible = false;
  if (mr.status != MaxTauRStatus::InfeasibleAtZero) {
    const FoMargins m = fo_feasibility(f, loss, mr.z.z12, mr.z.z21, mr.z.z22,
                                       default_omega_grid(f), tol);
    feasible = m.feasible;
    j["margins"] = {{"z_min_eig", m.z_min_eig},
                    {"freq_worst", m.freq_worst},
                    {"freq_tail", m.freq_tail},
                    {"ivt_value", m.ivt_value}};
    j["z"] = {{"z11", mr.z.z11}, {"z12", mr.z.z12}, {"z21", mr.z.z21}, {"z22", mr.z.z22}};
  }
  j["feasible"] = feasible;
  emit(out, j.dump(2));
  return 0;
}

int run_simulate(const std::string& system_path, const LossFlags& lf, CLI::App* cmd,
                 const std::string& signal, double amp, double omega, double t_end,
                 double dt, double es0, std::uint64_t seed, const std::string& out,
                 const std::string& ps_curve, int ps_points) {
  const SystemVariant sys = load_system_json(system_path);
  if (std::holds_alternative<FoLeadLag>(sys))
    throw InvalidParameter("simulate: fractional-order systems have no state-space oracle; "
                           "use the mu = 1 rational embedding");
  const LossParams loss = lf.resolve(cmd, ports_of(sys));

  if (!ps_curve.empty()) write_ps_curve_csv(ps_curve, es0, loss, ps_points);

  Signal v;
  if (signal == "sine")
    v = sine_signal(ports_of(sys), amp, omega, t_end, dt);
  else if (signal == "noise")
    v = noise_signal(ports_of(sys), amp, omega, t_end, dt, seed);
  else
    v = read_signal_csv(signal);

  EnergyTrajectory traj;
  if (const auto* lti = std::get_if<LtiAdmittance>(&sys))
    traj = simulate(*lti, v, es0, loss, dt);
  else
    traj = simulate(std::get<LtvAdmittanceGrid>(sys), v, es0, loss, dt);

  write_trajectory_csv(out.empty() ? "trajectory.csv" : out, traj);
  if (traj.choke)
    std::cout << "choke at t = " << traj.choke->time << " s (E_s = " << traj.choke->energy
              << " J, P_e = " << traj.choke->power << " W)" << std::endl;
  else
    std::cout << "no choke over " << traj.t.back() << " s (" << traj.size() << " samples)"
              << std::endl;
  return 0;
}

int run_pareto(const std::string& system_path, const LossFlags& lf, CLI::App* cmd,
               const std::string& r_grid, const std::string& tau_s_grid, double tol_rel,
               double tol, double bracket_hi, double bracket_cap, int threads,
               const std::string& out, const std::string& plot) {
  const SystemVariant sys = load_system_json(system_path);
  const auto* lti = std::get_if<LtiAdmittance>(&sys);
  if (!lti) throw InvalidParameter("pareto: expects an LTI system");
  const LossParams base = lf.resolve(cmd, lti->ports());
  const std::vector<double> scales = parse_list(r_grid, "--R-grid");
  const std::vector<double> taus = parse_list(tau_s_grid, "--tau-s-grid");
  Bracket br{bracket_hi, bracket_cap};
  const ParetoFront front = sweep(*lti, base.R, scales, taus, br, tol_rel, tol, threads);
  write_pareto_csv(out.empty() ? "pareto.csv" : out, front);
  if (!plot.empty()) write_pareto_svg(plot, front);
  int infeasible = 0, errors = 0;
  for (const auto& pt : front.points) {
    if (!pt.error.empty()) ++errors;
    if (pt.status == MaxTauRStatus::InfeasibleAtZero) ++infeasible;
  }
  std::cout << front.points.size() << " grid points (" << infeasible
            << " infeasible at tau_r = 0, " << errors << " errors)" << std::endl;
  return 0;
}

int run_fo(CLI::App* cmd, const std::string& system_path, double phi_m, double gamma_m,
           double omega_m, double mu, double R, const std::string& tau_s_str, double tol,
           const std::string& out) {
  FoLeadLag f;
  if (cmd->count("--system")) {
    const SystemVariant sys = load_system_json(system_path);
    const auto* fo = std::get_if<FoLeadLag>(&sys);
    if (!fo) throw InvalidParameter("fo: expects a system of kind 'fo'");
    f = *fo;
  } else {
    f = design_from_specs(phi_m, gamma_m, omega_m, mu);
  }
  const double tau_s = parse_tau(tau_s_str, "--tau-s");
  const FoMaxResult mr = fo_max_tau_r(f, R, tau_s, tol);
  json j;
  j["tool"] = "spsa";
  j["version"] = kToolVersion;
  j["config"] = {{"command", "fo"}, {"phi_m", phi_m},   {"gamma_m", gamma_m},
                 {"omega_m", omega_m}, {"mu", f.mu},    {"R", R},
                 {"tau_s", tau_s_str}, {"tol", tol}};
  j["filter"] = {{"kp", f.k_p}, {"wL", f.omega_L}, {"wh", f.omega_h}, {"mu", f.mu}};
  j["status"] = to_string(mr.status);
  j["tau_r_max"] = mr.tau_r;
  j["z"] = {{"z11", mr.z.z11}, {"z12", mr.z.z12}, {"z21", mr.z.z21}, {"z22", mr.z.z22}};
  emit(out, j.dump(2));
  return 0;
}

int run_backbone(double phi_m, double gamma_m, double omega_m, const std::string& mu_grid,
                 double R, const std::string& tau_s_str, const std::string& out,
                 const std::string& plot) {
  std::vector<double> mus;
  if (mu_grid.find(':') != std::string::npos) {
    // lo:hi:count
    double lo, hi;
    int count;
    if (std::sscanf(mu_grid.c_str(), "%lf:%lf:%d", &lo, &hi, &count) != 3 || count < 1)
      throw CLI::ValidationError("--mu-grid", "expected lo:hi:count or a comma list");
    for (int i = 0; i < count; ++i)
      mus.push_back(count == 1 ? lo : lo + (hi - lo) * double(i) / double(count - 1));
  } else {
    mus = parse_list(mu_grid, "--mu-grid");
  }
  const double tau_s = parse_tau(tau_s_str, "--tau-s");
  const auto pts = backbone(mus, phi_m, gamma_m, omega_m, R, tau_s);
  write_backbone_csv(out.empty() ? "backbone.csv" : out, pts);
  if (!plot.empty()) write_backbone_svg(plot, pts);
  int feasible = 0;
  for (const auto& pt : pts) feasible += pt.feasible ? 1 : 0;
  std::cout << pts.size() << " mu points, " << feasible << " feasible" << std::endl;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"feasibility analysis for self-powered synthetic admittances"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("spsa ") + kToolVersion);

  std::string system_path, out, plot, dump_lmi_path, verify_path;
  double tol = 1e-7;

  // check
  auto* check = app.add_subcommand("check", "decide self-powered feasibility");
  LossFlags check_loss;
  check->add_option("--system", system_path, "system JSON file");
  check_loss.attach(check);
  check->add_option("--tol", tol, "verdict band half-width");
  check->add_option("--out", out, "verdict JSON output ('-' for stdout)");
  check->add_option("--dump-lmi", dump_lmi_path, "dump assembled LMIs as JSON");
  check->add_option("--verify", verify_path, "re-verify a verdict JSON, no solving");

  // simulate
  auto* sim = app.add_subcommand("simulate", "run the energy-storage oracle");
  LossFlags sim_loss;
  std::string sim_system, signal = "sine", sim_out = "trajectory.csv", ps_curve;
  double amp = 1.0, omega = 1.0, t_end = 20.0, dt = 1e-3, es0 = 1.0;
  std::uint64_t seed = 1;
  int ps_points = 200;
  sim->add_option("--system", sim_system, "system JSON file")->required();
  sim_loss.attach(sim);
  sim->add_option("--signal", signal, "sine | noise | <csv file>");
  sim->add_option("--amp", amp, "signal amplitude");
  sim->add_option("--omega", omega, "sine frequency / noise bandwidth, rad/s");
  sim->add_option("--t-end", t_end, "horizon, seconds");
  sim->add_option("--dt", dt, "integration step, seconds");
  sim->add_option("--es0", es0, "initial stored energy, joules");
  sim->add_option("--seed", seed, "noise generator seed");
  sim->add_option("--out", sim_out, "trajectory CSV output");
  sim->add_option("--ps-curve", ps_curve, "also write the P_s vs P_e curve CSV");
  sim->add_option("--ps-points", ps_points, "points on the P_s curve");

  // pareto
  auto* par = app.add_subcommand("pareto", "max tau_r sweeps over (R, tau_s)");
  LossFlags par_loss;
  std::string par_system, r_grid = "1", tau_s_grid = "10", par_out = "pareto.csv";
  double tol_rel = 1e-3, bracket_hi = 1e3, bracket_cap = 1e6;
  int threads = 0;
  par->add_option("--system", par_system, "system JSON file")->required();
  par_loss.attach(par);
  par->add_option("--R-grid", r_grid, "R scale factors, comma-separated");
  par->add_option("--tau-s-grid", tau_s_grid, "tau_s values, comma-separated (inf ok)");
  par->add_option("--tol-rel", tol_rel, "relative tolerance of the tau_r bisection");
  par->add_option("--tol", tol, "LMI verdict band half-width");
  par->add_option("--bracket-hi", bracket_hi, "first upper bracket probe, s");
  par->add_option("--bracket-cap", bracket_cap, "bracket expansion cap, s");
  par->add_option("--threads", threads, "sweep worker threads (0 = auto)");
  par->add_option("--out", par_out, "front CSV output");
  par->add_option("--plot", plot, "feasible-region SVG output");

  // fo
  auto* fo = app.add_subcommand("fo", "fractional-order lead-lag feasibility");
  std::string fo_system, fo_tau_s = "inf", fo_out;
  double phi_m = 30.0, gamma_m = 1.0, omega_m = 1.0, mu = 1.0, fo_R = 0.1, fo_tol = 1e-4;
  fo->add_option("--system", fo_system, "system JSON of kind 'fo'");
  fo->add_option("--phi-m", phi_m, "peak phase, degrees");
  fo->add_option("--gamma-m", gamma_m, "gain at omega_m");
  fo->add_option("--omega-m", omega_m, "peak frequency, rad/s");
  fo->add_option("--mu", mu, "fractional order");
  fo->add_option("--R", fo_R, "actuator resistance, ohms");
  fo->add_option("--tau-s", fo_tau_s, "leakage time constant, s or 'inf'");
  fo->add_option("--tol", fo_tol, "relative tolerance on tau_r*");
  fo->add_option("--out", fo_out, "result JSON output ('-' for stdout)");

  // backbone
  auto* bb = app.add_subcommand("backbone", "corner-point curve over mu");
  std::string mu_grid = "0.354:1.0:16", bb_tau_s = "inf", bb_out = "backbone.csv", bb_plot;
  double bb_phi = 30.0, bb_gamma = 1.0, bb_omega = 1.0, bb_R = 0.1;
  bb->add_option("--phi-m", bb_phi, "peak phase, degrees");
  bb->add_option("--gamma-m", bb_gamma, "gain at omega_m");
  bb->add_option("--omega-m", bb_omega, "peak frequency, rad/s");
  bb->add_option("--mu-grid", mu_grid, "lo:hi:count or comma list");
  bb->add_option("--R", bb_R, "actuator resistance, ohms");
  bb->add_option("--tau-s", bb_tau_s, "tau_r* is evaluated at this tau_s");
  bb->add_option("--out", bb_out, "backbone CSV output");
  bb->add_option("--plot", bb_plot, "backbone SVG output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
    app.exit(e);
    return 2;
  }

  try {
    if (check->parsed()) {
      if (!verify_path.empty()) {
        std::string detail;
        const bool ok = reverify_verdict_json(read_file(verify_path), &detail);
        std::cout << (ok ? "verified: " : "FAILED: ") << detail << std::endl;
        return ok ? 0 : 1;
      }
      if (system_path.empty())
        throw InvalidParameter("check: --system is required (or --verify)");
      return run_check(system_path, check_loss, check, tol, out, dump_lmi_path);
    }
    if (sim->parsed())
      return run_simulate(sim_system, sim_loss, sim, signal, amp, omega, t_end, dt, es0,
                          seed, sim_out, ps_curve, ps_points);
    if (par->parsed())
      return run_pareto(par_system, par_loss, par, r_grid, tau_s_grid, tol_rel, tol,
                        bracket_hi, bracket_cap, threads, par_out, plot);
    if (fo->parsed())
      return run_fo(fo, fo_system, phi_m, gamma_m, omega_m, mu, fo_R, fo_tau_s, fo_tol,
                    fo_out);
    if (bb->parsed())
      return run_backbone(bb_phi, bb_gamma, bb_omega, mu_grid, bb_R, bb_tau_s, bb_out,
                          bb_plot);
  } catch (const SchemaError& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 2;
  } catch (const InvalidParameter& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 2;
  } catch (const DimensionMismatch& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 2;
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
  return 2;
}
