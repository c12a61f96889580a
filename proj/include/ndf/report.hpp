#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "ndf/flow.hpp"
#include "ndf/forms.hpp"
#include "ndf/verifier.hpp"

namespace ndf {

using json = nlohmann::json;

/// Serializes with sorted object keys and every floating-point number
/// printed with 17 significant digits, so equal inputs give equal bytes and
/// every double survives a round trip.
std::string dump_canonical(const json& j);

json to_json(const PLFunction& phi);
PLFunction pl_from_json(const json& j);

json to_json(const Witness& w);
Witness witness_from_json(const json& j);

/// {name, passed, worst_violation, n_tested, witness}
json to_json(const CheckResult& r);

/// {"version": 1, "seed": seed, "checks": [...]}
std::string report_json(std::uint64_t seed, const std::vector<CheckResult>& results);

/// Parses one form descriptor; `index` names unnamed forms "form<index>".
/// Throws BadSpec on any schema violation.
FormDescriptor descriptor_from_json(const json& j, std::size_t index);

/// Reads the optional "suite" object of a run config.
SuiteConfig suite_from_json(const json& suite, std::uint64_t seed);

/// Reads the "flow" object of a run config.
FlowConfig flow_from_json(const json& flow);

/// Header step,time,energy,residual,v0..v{n-1}; one row per state.
std::string trace_csv(const FlowTrace& trace);

}  // namespace ndf
