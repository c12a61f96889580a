#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "ndf/forms.hpp"
#include "ndf/measure.hpp"

namespace ndf {

struct FlowConfig {
  double tau = 0.01;
  std::size_t n_steps = 1;
  double inner_tol = 1e-9;
  std::size_t max_inner_iters = 200000;
  std::uint64_t probe_seed = 0;
};

/// Throws BadSpec unless tau > 0, inner_tol > 0 and n_steps >= 1.
void validate(const FlowConfig& cfg);

/// E(w) + ||w - u||^2 / (2 tau), with the m-weighted norm.
double prox_objective(const FormInstance& form, const Field& w, const Field& u,
                      double tau);

struct ProxResult {
  Field state;
  /// Duality gap at `state`: an upper bound on its suboptimality.
  double residual;
  std::size_t iterations;
};

/// Resolvent (I + tau dE)^{-1} u, solved until the duality gap is at most
/// inner_tol. The answer is also checked against u and 32 seeded probe
/// fields; NoConvergence is thrown if either test fails.
ProxResult prox_solve(const FormInstance& form, const Field& u, double tau,
                      double inner_tol, std::size_t max_inner_iters = 200000,
                      std::uint64_t probe_seed = 0);

inline Field prox_step(const FormInstance& form, const Field& u, double tau,
                       double inner_tol = 1e-9) {
  return prox_solve(form, u, tau, inner_tol).state;
}

struct FlowTrace {
  double tau = 0.0;
  std::vector<Field> states;             ///< n_steps + 1, states[0] = u0
  std::vector<ExtendedEnergy> energies;  ///< one per state
  std::vector<double> residuals;         ///< one per step
};

/// Implicit Euler: states[k+1] = prox(states[k]). A failing step is reported
/// as NoConvergence naming its index.
FlowTrace evolve(const FormInstance& form, const Field& u0,
                 const FlowConfig& cfg);

}  // namespace ndf
