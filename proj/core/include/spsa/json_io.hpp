#pragma once

#include <string>
#include <variant>

#include "spsa/feas_lti.hpp"
#include "spsa/feas_ltv.hpp"
#include "spsa/lmi.hpp"
#include "spsa/types.hpp"

namespace spsa {

inline constexpr const char* kToolVersion = "0.1.0";

using SystemVariant = std::variant<LtiAdmittance, LtvAdmittanceGrid, FoLeadLag>;

/// System descriptions (row-major nested arrays):
///   {"kind":"lti","A":[[..]],"B":[[..]],"C":[[..]],"D":[[..]]}
///   {"kind":"ltv","t":[..],"A":[[[..]]],"B":[[[..]]],"C":[[[..]]],"D":[[[..]]]}
///   {"kind":"fo","kp":..,"wL":..,"wh":..,"mu":..}
/// Schema violations throw SchemaError carrying the JSON pointer of the
/// offending field.
SystemVariant parse_system_json(const std::string& text);
SystemVariant load_system_json(const std::string& path);
std::string system_to_json(const SystemVariant& sys);

/// Loss parameters: {"R":[..diagonal..],"tau_s":..|"inf","tau_r":..|"inf","C_s":..}
LossParams parse_loss_json(const std::string& text);
LossParams load_loss_json(const std::string& path);
std::string loss_to_json(const LossParams& loss);

/// Self-contained verdict documents: tool version, resolved config, the
/// system and loss they apply to, margins, and the certificate, so the
/// verdict re-verifies without the original solve.
std::string verdict_to_json(const SystemVariant& sys, const LossParams& loss,
                            const FeasVerdict& verdict,
                            const std::string& resolved_config_json);
std::string verdict_to_json(const SystemVariant& sys, const LossParams& loss,
                            const LtvVerdict& verdict,
                            const std::string& resolved_config_json);

/// Re-parses a verdict document, re-assembles the LMIs, and re-checks the
/// certificate eigenvalues (1e-9 absolute) by assembly + eigenvalues only.
/// Returns false with a diagnostic when anything fails to reproduce.
bool reverify_verdict_json(const std::string& text, std::string* detail = nullptr);

/// Debug dump of an assembled problem: per constraint F0 and basis matrices.
std::string lmi_to_json(const LmiProblem& p);

std::string read_file(const std::string& path);

}  // namespace spsa
