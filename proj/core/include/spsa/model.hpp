#pragma once

#include <complex>

#include "spsa/types.hpp"

namespace spsa {

/// Y(s) = C (sI - A)^-1 B + D. For n = 0 returns D.
/// Throws SingularResolvent when s lies within 1e-12 (scaled by the spectral
/// radius) of an eigenvalue of A.
MatrixXcd eval_tf_lti(const LtiAdmittance& sys, Complex s);

/// Y(s) = k_p * ((1 + s/omega_L)/(1 + s/omega_h))^mu, principal branch.
/// Throws BranchPoint when |s + omega_h| < 1e-12 * omega_h.
Complex eval_tf_fo(const FoLeadLag& f, Complex s);

/// Evaluates Y(j*omega - 1/tau_s). With tau_s = inf this is Y(j*omega).
/// Evaluator errors propagate; they signal an analyticity violation of the
/// shifted response.
MatrixXcd shift_frequency(const LtiAdmittance& sys, double tau_s, double omega);
Complex shift_frequency(const FoLeadLag& f, double tau_s, double omega);

/// Shift applied to an arbitrary evaluator (for oracles and tests).
template <typename Eval>
  requires std::invocable<Eval&, Complex>
auto shift_frequency(Eval&& eval, double tau_s, double omega) {
  const Complex s(tau_s == kInf ? 0.0 : -1.0 / tau_s, omega);
  return eval(s);
}

}  // namespace spsa
