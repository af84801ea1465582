#include "spsa/json_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "spsa/errors.hpp"
#include "spsa/io_util.hpp"

namespace spsa {

using nlohmann::json;

namespace {

json matrix_to_json(const MatrixXd& M) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

MatrixXd matrix_from_json(const json& j, const std::string& ptr) {
  if (!j.is_array()) throw SchemaError("expected a nested array", ptr);
  const size_t rows = j.size();
  size_t cols = 0;
  for (size_t i = 0; i < rows; ++i) {
    if (!j[i].is_array()) throw SchemaError("expected an array row", ptr + "/" + std::to_string(i));
    if (i == 0)
      cols = j[i].size();
    else if (j[i].size() != cols)
      throw SchemaError("ragged matrix rows", ptr + "/" + std::to_string(i));
  }
  MatrixXd M(rows, cols);
  for (size_t i = 0; i < rows; ++i)
    for (size_t c = 0; c < cols; ++c) {
      const json& v = j[i][c];
      if (!v.is_number())
        throw SchemaError("expected a number",
                          ptr + "/" + std::to_string(i) + "/" + std::to_string(c));
      M(i, c) = v.get<double>();
    }
  return M;
}

double tau_from_json(const json& j, const std::string& ptr) {
  if (j.is_string()) {
    if (j.get<std::string>() == "inf") return kInf;
    throw SchemaError("expected a number or \"inf\"", ptr);
  }
  if (!j.is_number()) throw SchemaError("expected a number or \"inf\"", ptr);
  return j.get<double>();
}

json tau_to_json(double v) {
  if (v == kInf) return json("inf");
  return json(v);
}

const json& need(const json& j, const char* key, const std::string& ptr) {
  auto it = j.find(key);
  if (it == j.end()) throw SchemaError("missing field", ptr + "/" + key);
  return *it;
}

json parse_text(const std::string& text) {
  json j = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) throw SchemaError("invalid JSON", "/");
  return j;
}

LtiAdmittance lti_from_json(const json& j) {
  const MatrixXd D = matrix_from_json(need(j, "D", ""), "/D");
  const auto np = D.rows();
  MatrixXd A = matrix_from_json(need(j, "A", ""), "/A");
  if (A.size() == 0) A = MatrixXd::Zero(0, 0);
  const auto n = A.rows();
  MatrixXd B = matrix_from_json(need(j, "B", ""), "/B");
  if (B.size() == 0) B = MatrixXd::Zero(n, n == 0 ? np : B.cols());
  MatrixXd C = matrix_from_json(need(j, "C", ""), "/C");
  if (C.size() == 0) C = MatrixXd::Zero(np, n);
  try {
    return LtiAdmittance(A, B, C, D);
  } catch (const Error& e) {
    throw SchemaError(e.what(), "/A");
  }
}

std::vector<MatrixXd> tensor_from_json(const json& j, const std::string& ptr) {
  if (!j.is_array()) throw SchemaError("expected an array of matrices", ptr);
  std::vector<MatrixXd> out;
  for (size_t k = 0; k < j.size(); ++k)
    out.push_back(matrix_from_json(j[k], ptr + "/" + std::to_string(k)));
  return out;
}

}  // namespace

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

SystemVariant parse_system_json(const std::string& text) {
  const json j = parse_text(text);
  const json& kind = need(j, "kind", "");
  if (!kind.is_string()) throw SchemaError("expected a string", "/kind");
  const std::string k = kind.get<std::string>();
  if (k == "lti") return lti_from_json(j);
  if (k == "ltv") {
    LtvAdmittanceGrid g;
    const json& jt = need(j, "t", "");
    if (!jt.is_array()) throw SchemaError("expected an array", "/t");
    for (const auto& v : jt) {
      if (!v.is_number()) throw SchemaError("expected numbers", "/t");
      g.t.push_back(v.get<double>());
    }
    g.A = tensor_from_json(need(j, "A", ""), "/A");
    g.B = tensor_from_json(need(j, "B", ""), "/B");
    g.C = tensor_from_json(need(j, "C", ""), "/C");
    g.D = tensor_from_json(need(j, "D", ""), "/D");
    try {
      g.validate();
    } catch (const Error& e) {
      throw SchemaError(e.what(), "/t");
    }
    return g;
  }
  if (k == "fo") {
    FoLeadLag f;
    const json& kp = need(j, "kp", "");
    const json& wL = need(j, "wL", "");
    const json& wh = need(j, "wh", "");
    const json& mu = need(j, "mu", "");
    if (!kp.is_number()) throw SchemaError("expected a number", "/kp");
    if (!wL.is_number()) throw SchemaError("expected a number", "/wL");
    if (!wh.is_number()) throw SchemaError("expected a number", "/wh");
    if (!mu.is_number()) throw SchemaError("expected a number", "/mu");
    f.k_p = kp.get<double>();
    f.omega_L = wL.get<double>();
    f.omega_h = wh.get<double>();
    f.mu = mu.get<double>();
    try {
      f.validate();
    } catch (const Error& e) {
      throw SchemaError(e.what(), "/kp");
    }
    return f;
  }
  throw SchemaError("unknown system kind '" + k + "'", "/kind");
}

SystemVariant load_system_json(const std::string& path) {
  return parse_system_json(read_file(path));
}

std::string system_to_json(const SystemVariant& sys) {
  json j;
  if (const auto* lti = std::get_if<LtiAdmittance>(&sys)) {
    j["kind"] = "lti";
    j["A"] = matrix_to_json(lti->A);
    j["B"] = matrix_to_json(lti->B);
    j["C"] = matrix_to_json(lti->C);
    j["D"] = matrix_to_json(lti->D);
  } else if (const auto* ltv = std::get_if<LtvAdmittanceGrid>(&sys)) {
    j["kind"] = "ltv";
    j["t"] = ltv->t;
    json A = json::array(), B = json::array(), C = json::array(), D = json::array();
    for (int k = 0; k < ltv->samples(); ++k) {
      A.push_back(matrix_to_json(ltv->A[k]));
      B.push_back(matrix_to_json(ltv->B[k]));
      C.push_back(matrix_to_json(ltv->C[k]));
      D.push_back(matrix_to_json(ltv->D[k]));
    }
    j["A"] = std::move(A);
    j["B"] = std::move(B);
    j["C"] = std::move(C);
    j["D"] = std::move(D);
  } else {
    const auto& f = std::get<FoLeadLag>(sys);
    j["kind"] = "fo";
    j["kp"] = f.k_p;
    j["wL"] = f.omega_L;
    j["wh"] = f.omega_h;
    j["mu"] = f.mu;
  }
  return j.dump(2);
}

LossParams parse_loss_json(const std::string& text) {
  const json j = parse_text(text);
  const json& jR = need(j, "R", "");
  if (!jR.is_array() || jR.empty()) throw SchemaError("expected a non-empty array", "/R");
  VectorXd R(jR.size());
  for (size_t i = 0; i < jR.size(); ++i) {
    if (!jR[i].is_number())
      throw SchemaError("expected a number", "/R/" + std::to_string(i));
    R[i] = jR[i].get<double>();
  }
  LossParams loss;
  loss.R = R;
  loss.tau_s = tau_from_json(need(j, "tau_s", ""), "/tau_s");
  loss.tau_r = tau_from_json(need(j, "tau_r", ""), "/tau_r");
  if (j.contains("C_s")) {
    if (!j["C_s"].is_number()) throw SchemaError("expected a number", "/C_s");
    loss.C_s = j["C_s"].get<double>();
  }
  try {
    loss.validate();
  } catch (const Error& e) {
    throw SchemaError(e.what(), "/R");
  }
  return loss;
}

LossParams load_loss_json(const std::string& path) { return parse_loss_json(read_file(path)); }

std::string loss_to_json(const LossParams& loss) {
  json j;
  j["R"] = std::vector<double>(loss.R.data(), loss.R.data() + loss.R.size());
  j["tau_s"] = tau_to_json(loss.tau_s);
  j["tau_r"] = tau_to_json(loss.tau_r);
  j["C_s"] = loss.C_s;
  return j.dump(2);
}

namespace {

json solve_result_to_json(const SolveResult& r) {
  json j;
  j["status"] = to_string(r.status);
  j["margin"] = r.margin;
  j["gap"] = r.gap;
  j["converged"] = r.converged;
  j["worst_eig"] = r.certificate.worst_eig;
  return j;
}

json config_or_null(const std::string& resolved_config_json) {
  if (resolved_config_json.empty()) return json(nullptr);
  json c = json::parse(resolved_config_json, nullptr, false);
  if (c.is_discarded()) return json(resolved_config_json);
  return c;
}

}  // namespace

std::string verdict_to_json(const SystemVariant& sys, const LossParams& loss,
                            const FeasVerdict& verdict,
                            const std::string& resolved_config_json) {
  json j;
  j["tool"] = "spsa";
  j["version"] = kToolVersion;
  j["config"] = config_or_null(resolved_config_json);
  j["system"] = json::parse(system_to_json(sys));
  j["loss"] = json::parse(loss_to_json(loss));
  j["regime"] = to_string(verdict.regime);
  json suff = solve_result_to_json(verdict.sufficient);
  if (!verdict.sufficient.certificate.values.empty()) {
    json cert;
    cert["P"] = matrix_to_json(verdict.sufficient.certificate.values[0]);
    if (verdict.sufficient.certificate.values.size() > 1)
      cert["X"] = matrix_to_json(verdict.sufficient.certificate.values[1]);
    suff["certificate"] = std::move(cert);
  }
  j["sufficient"] = std::move(suff);
  json nec;
  nec["hinf"]["pass"] = verdict.necessary.pass;
  nec["hinf"]["shifted_stable"] = verdict.necessary.shifted_stable;
  nec["hinf"]["norm"] = verdict.necessary.norm;
  if (!verdict.necessary.shifted_stable)
    nec["hinf"]["unstable_real"] = verdict.necessary.unstable_real;
  nec["lmi"] = solve_result_to_json(verdict.necessary_lmi);
  j["necessary"] = std::move(nec);
  return j.dump(2);
}

std::string verdict_to_json(const SystemVariant& sys, const LossParams& loss,
                            const LtvVerdict& verdict,
                            const std::string& resolved_config_json) {
  json j;
  j["tool"] = "spsa";
  j["version"] = kToolVersion;
  j["config"] = config_or_null(resolved_config_json);
  j["system"] = json::parse(system_to_json(sys));
  j["loss"] = json::parse(loss_to_json(loss));
  j["regime"] = "ltv_discretized";
  json suff = solve_result_to_json(verdict.result);
  suff["discretized"] = verdict.discretized;
  suff["samples"] = verdict.certificate.samples;
  suff["dt"] = verdict.certificate.dt;
  if (!verdict.certificate.P.empty()) {
    json P = json::array(), X = json::array();
    for (const auto& Pk : verdict.certificate.P) P.push_back(matrix_to_json(Pk));
    for (const auto& Xk : verdict.certificate.X) X.push_back(matrix_to_json(Xk));
    suff["certificate"]["P"] = std::move(P);
    suff["certificate"]["X"] = std::move(X);
  }
  j["sufficient"] = std::move(suff);
  return j.dump(2);
}

bool reverify_verdict_json(const std::string& text, std::string* detail) {
  auto fail = [&](const std::string& why) {
    if (detail) *detail = why;
    return false;
  };
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) return fail("invalid JSON");
  try {
    const SystemVariant sys = parse_system_json(j.at("system").dump());
    const LossParams loss = parse_loss_json(j.at("loss").dump());
    const json& suff = j.at("sufficient");
    const std::string status = suff.at("status").get<std::string>();
    const std::vector<double> recorded =
        suff.at("worst_eig").get<std::vector<double>>();

    LmiProblem p;
    VarValues values;
    if (const auto* lti = std::get_if<LtiAdmittance>(&sys)) {
      p = assemble_sufficient(*lti, loss);
      values = p.zero_values();
      if (suff.contains("certificate")) {
        values[0] = matrix_from_json(suff["certificate"].at("P"), "/sufficient/certificate/P");
        if (values.size() > 1)
          values[1] = matrix_from_json(suff["certificate"].at("X"), "/sufficient/certificate/X");
      }
    } else if (const auto* ltv = std::get_if<LtvAdmittanceGrid>(&sys)) {
      p = assemble_ltv(*ltv, loss);
      values = p.zero_values();
      if (suff.contains("certificate")) {
        const json& P = suff["certificate"].at("P");
        const json& X = suff["certificate"].at("X");
        for (size_t k = 0; k < P.size(); ++k) {
          values[2 * k] = matrix_from_json(P[k], "/sufficient/certificate/P");
          values[2 * k + 1] = matrix_from_json(X[k], "/sufficient/certificate/X");
        }
      }
    } else {
      return fail("fractional-order verdicts re-verify through fo_feasibility, not LMIs");
    }
    p.finalize();
    const VerifyReport rep = verify(p, values);
    if (rep.worst_eig.size() != recorded.size())
      return fail("constraint count mismatch");
    for (size_t c = 0; c < recorded.size(); ++c) {
      if (std::abs(rep.worst_eig[c] - recorded[c]) > 1e-9)
        return fail("eigenvalue " + std::to_string(c) + " mismatch: recorded " +
                    std::to_string(recorded[c]) + ", recomputed " +
                    std::to_string(rep.worst_eig[c]));
    }
    if (status == "feasible" && rep.margin < 0.0)
      return fail("recorded Feasible but certificate margin is negative");
    if (detail) *detail = "certificate reproduces all recorded eigenvalues";
    return true;
  } catch (const std::exception& e) {
    return fail(e.what());
  }
}

std::string lmi_to_json(const LmiProblem& p) {
  if (!p.finalized()) throw InvalidParameter("lmi_to_json: problem not finalized");
  json j;
  json vars = json::array();
  for (const auto& v : p.variables()) {
    json jv;
    jv["name"] = v.name;
    jv["rows"] = v.rows;
    jv["cols"] = v.cols;
    jv["symmetric"] = v.symmetric;
    vars.push_back(std::move(jv));
  }
  j["variables"] = std::move(vars);
  json cons = json::array();
  for (const auto& c : p.constraints()) {
    json jc;
    jc["name"] = c.name;
    jc["sense"] = c.sense == ConstraintSense::NegSemidef ? "<=0" : ">=epsI";
    jc["eps"] = c.eps;
    jc["scale"] = c.scale;
    jc["F0"] = matrix_to_json(c.F0);
    json basis = json::array();
    for (const auto& [idx, Fi] : c.basis) {
      json jb;
      jb["y_index"] = idx;
      jb["F"] = matrix_to_json(Fi);
      basis.push_back(std::move(jb));
    }
    jc["basis"] = std::move(basis);
    cons.push_back(std::move(jc));
  }
  j["constraints"] = std::move(cons);
  return j.dump(2);
}

}  // namespace spsa
