#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ndf/contraction.hpp"
#include "ndf/forms.hpp"
#include "ndf/sampling.hpp"

namespace ndf {

/// Inputs of one tested tuple: named fields (as raw values on the check's
/// space), named scalars and an optional contraction.
struct Witness {
  std::map<std::string, std::vector<double>> fields;
  std::map<std::string, double> scalars;
  std::optional<PLFunction> contraction;
};

struct CheckResult {
  std::string name;
  bool passed = false;
  /// max over tested tuples of (lhs - rhs); for identities, the residual.
  double worst_violation = 0.0;
  Witness witness;
  std::size_t n_tested = 0;
  std::uint64_t seed = 0;
  double tolerance = 0.0;
};

struct SuiteConfig {
  std::size_t n_samples = 500;
  std::uint64_t seed = 0;
  double inequality_tol = 1e-9;
  double identity_tol = 1e-12;
  FieldSamplerSpec fields;
  ContractionSamplerSpec contractions;
  /// Put phi = -id first in the normal-contraction sample set.
  bool force_negation = true;
  /// Include the form-independent identity suite in run_suite.
  bool run_identities = true;
  /// Points of the unit-weight space used by the identity suite.
  std::size_t identity_points = 8;
};

/// Throws BadSpec unless n_samples >= 1 and tolerances are positive.
void validate(const SuiteConfig& cfg);

/// A sampler plus a violation functional. Running it draws n tuples from the
/// stream (seed, name) and keeps the worst one, so results are independent
/// of evaluation order and can be replayed from the witness alone.
struct Check {
  std::string name;
  double tolerance;
  std::function<Witness(Rng&, std::size_t index)> sample;
  std::function<double(const Witness&)> violation;
};

CheckResult run_check(const Check& check, std::size_t n, std::uint64_t seed);

/// Runs independent checks concurrently; output order matches input order.
std::vector<CheckResult> run_checks(const std::vector<Check>& checks,
                                    std::size_t n, std::uint64_t seed);

inline double replay(const Check& check, const Witness& w) {
  return check.violation(w);
}

// Check families. Names are prefixed with "<form name>." when the form has
// a name.

/// minmax, hk, prcr1, prcr2, symmetry
std::vector<Check> criteria_checks(const FormInstance& form, const SuiteConfig& cfg);
Check normal_contraction_check(const FormInstance& form, const SuiteConfig& cfg);
/// Applies the factors of decompose(phi) one by one; the energy must never
/// increase and must end at E(phi o f).
Check decomposition_chain_check(const FormInstance& form, const SuiteConfig& cfg);
/// One check per displayed inequality of the three basic-contraction proofs,
/// plus their conclusions; the two-sided case is also run in mirrored form.
std::vector<Check> proof_chain_checks(const FormInstance& form, const SuiteConfig& cfg);
std::vector<Check> identity_checks(const SuiteConfig& cfg);

std::vector<CheckResult> check_criteria(const FormInstance& form, const SuiteConfig& cfg);
CheckResult check_normal_contraction(const FormInstance& form, const SuiteConfig& cfg);
CheckResult check_decomposition_chain(const FormInstance& form, const SuiteConfig& cfg);
/// Throws PreconditionFailed unless every criterion, symmetry included, passes.
std::vector<CheckResult> run_proof_chain(const FormInstance& form, const SuiteConfig& cfg);
std::vector<CheckResult> check_identities(const SuiteConfig& cfg);

/// The non-symmetric grid form with integrand max(v, 0) on 11 nodes of
/// spacing 0.1 and f_i = -i/10: E(f) = 0 but E(-f) = 1. Always reports
/// passed = false; the witness carries f, phi = -id and both energies.
CheckResult counterexample_demo();
FormInstance counterexample_form();

/// Everything `verify` runs for a list of forms: criteria, normal contraction,
/// and for forms that pass the criteria including symmetry, the
/// decomposition chain and the proof chain; then the identity suite.
std::vector<CheckResult> run_suite(const std::vector<FormInstance>& forms,
                                   const SuiteConfig& cfg);

}  // namespace ndf
