#include "ndf/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "ndf/error.hpp"

namespace ndf {

namespace {

std::string format_double(double v) {
  if (std::isnan(v)) return "\"nan\"";
  if (std::isinf(v)) return v > 0 ? "\"inf\"" : "\"-inf\"";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void dump(const json& j, std::string& out) {
  switch (j.type()) {
    case json::value_t::object: {
      out += '{';
      bool first = true;
      for (const auto& [k, v] : j.items()) {  // std::map storage: sorted keys
        if (!first) out += ',';
        first = false;
        out += json(k).dump();
        out += ':';
        dump(v, out);
      }
      out += '}';
      break;
    }
    case json::value_t::array: {
      out += '[';
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i > 0) out += ',';
        dump(j[i], out);
      }
      out += ']';
      break;
    }
    case json::value_t::number_float:
      out += format_double(j.get<double>());
      break;
    default:
      out += j.dump();
  }
}

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::BadSpec, what); }

double as_double(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  bad("expected a number");
}

template <class T>
T field(const json& j, const char* key) {
  if (!j.contains(key)) bad(std::string("missing key '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    bad(std::string("key '") + key + "' has the wrong type");
  }
}

template <class T>
T field_or(const json& j, const char* key, T fallback) {
  return j.contains(key) ? field<T>(j, key) : fallback;
}

}  // namespace

std::string dump_canonical(const json& j) {
  std::string out;
  dump(j, out);
  return out;
}

json to_json(const PLFunction& phi) {
  json j;
  j["breakpoints"] = std::vector<double>(phi.breakpoints().begin(), phi.breakpoints().end());
  j["slopes"] = std::vector<double>(phi.slopes().begin(), phi.slopes().end());
  j["anchor_value"] = phi.anchor_value();
  return j;
}

PLFunction pl_from_json(const json& j) {
  std::vector<double> bps;
  std::vector<double> slopes;
  for (const auto& b : j.at("breakpoints")) bps.push_back(as_double(b));
  for (const auto& s : j.at("slopes")) slopes.push_back(as_double(s));
  return {std::move(bps), std::move(slopes), as_double(j.at("anchor_value"))};
}

json to_json(const Witness& w) {
  json j = json::object();
  json fields = json::object();
  for (const auto& [k, v] : w.fields) fields[k] = v;
  json scalars = json::object();
  for (const auto& [k, v] : w.scalars) scalars[k] = v;
  j["fields"] = fields;
  j["scalars"] = scalars;
  if (w.contraction) j["contraction"] = to_json(*w.contraction);
  return j;
}

Witness witness_from_json(const json& j) {
  Witness w;
  for (const auto& [k, v] : j.at("fields").items()) {
    std::vector<double> vals;
    for (const auto& x : v) vals.push_back(as_double(x));
    w.fields[k] = std::move(vals);
  }
  for (const auto& [k, v] : j.at("scalars").items()) w.scalars[k] = as_double(v);
  if (j.contains("contraction")) w.contraction = pl_from_json(j.at("contraction"));
  return w;
}

json to_json(const CheckResult& r) {
  json j;
  j["name"] = r.name;
  j["passed"] = r.passed;
  j["worst_violation"] = r.worst_violation;
  j["n_tested"] = r.n_tested;
  j["witness"] = to_json(r.witness);
  return j;
}

std::string report_json(std::uint64_t seed, const std::vector<CheckResult>& results) {
  json j;
  j["version"] = 1;
  j["seed"] = seed;
  j["checks"] = json::array();
  for (const auto& r : results) j["checks"].push_back(to_json(r));
  return dump_canonical(j);
}

namespace {

Integrand integrand_from_json(const json& j) {
  const auto name = field<std::string>(j, "name");
  if (name == "abs_power") return AbsPower{field<double>(j, "p")};
  if (name == "max_positive_part") return MaxPositivePart{};
  if (name == "finsler_weighted") return FinslerWeighted{field<std::vector<double>>(j, "a")};
  bad("unknown integrand '" + name + "'");
}

Psi psi_from_json(const json& j) {
  const auto name = field<std::string>(j, "name");
  if (name == "square") return {PsiKind::Square, 2.0};
  if (name == "quartic") return {PsiKind::Quartic, 4.0};
  if (name == "abs") return {PsiKind::Abs, 1.0};
  if (name == "power") return {PsiKind::Power, field<double>(j, "p")};
  bad("unknown psi '" + name + "'");
}

}  // namespace

FormDescriptor descriptor_from_json(const json& j, std::size_t index) {
  if (!j.is_object()) bad("form descriptor must be an object");
  FormDescriptor d;
  d.name = field_or<std::string>(j, "name", "form" + std::to_string(index));
  d.nodes = field<std::size_t>(j, "nodes");
  if (j.contains("weights")) d.weights = field<std::vector<double>>(j, "weights");
  const auto kind = field<std::string>(j, "kind");
  if (kind == "graph_quadratic") {
    GraphQuadratic g;
    if (j.contains("random")) {
      const json& r = j.at("random");
      g = random_graph(d.nodes, field_or<double>(r, "edge_prob", 0.3),
                       field_or<std::uint64_t>(r, "seed", 0));
    }
    if (j.contains("edges")) {
      for (const auto& e : j.at("edges")) {
        if (!e.is_array() || e.size() != 3) bad("graph edges are [a, b, w] triples");
        g.edges.push_back({e[0].get<std::size_t>(), e[1].get<std::size_t>(), as_double(e[2])});
      }
    }
    d.kind = std::move(g);
  } else if (kind == "nonlocal_psi") {
    NonlocalPsi nl;
    nl.psi = psi_from_json(j.at("psi"));
    if (j.contains("kernel")) nl.kernel = field<std::vector<std::vector<double>>>(j, "kernel");
    d.kind = std::move(nl);
  } else if (kind == "local_grid_1d") {
    if (!j.contains("integrand")) bad("local_grid_1d needs an integrand");
    d.kind = LocalGrid1D{field<double>(j, "h"), integrand_from_json(j.at("integrand"))};
  } else {
    bad("unknown form kind '" + kind + "'");
  }
  return d;
}

SuiteConfig suite_from_json(const json& s, std::uint64_t seed) {
  SuiteConfig c;
  c.seed = seed;
  if (s.is_null()) return c;
  if (!s.is_object()) bad("suite must be an object");
  c.n_samples = field_or<std::size_t>(s, "n_samples", c.n_samples);
  c.inequality_tol = field_or<double>(s, "inequality_tol", c.inequality_tol);
  c.identity_tol = field_or<double>(s, "identity_tol", c.identity_tol);
  c.force_negation = field_or<bool>(s, "force_negation", c.force_negation);
  c.run_identities = field_or<bool>(s, "identities", c.run_identities);
  c.fields.amplitude = field_or<double>(s, "field_amplitude", c.fields.amplitude);
  c.contractions.max_k = field_or<std::size_t>(s, "max_k", c.contractions.max_k);
  c.contractions.max_depth = field_or<std::size_t>(s, "max_depth", c.contractions.max_depth);
  validate(c);
  return c;
}

FlowConfig flow_from_json(const json& f) {
  if (!f.is_object()) bad("flow must be an object");
  FlowConfig c;
  c.tau = field<double>(f, "tau");
  c.n_steps = field<std::size_t>(f, "n_steps");
  c.inner_tol = field_or<double>(f, "inner_tol", c.inner_tol);
  c.max_inner_iters = field_or<std::size_t>(f, "max_inner_iters", c.max_inner_iters);
  c.probe_seed = field_or<std::uint64_t>(f, "probe_seed", c.probe_seed);
  validate(c);
  return c;
}

std::string trace_csv(const FlowTrace& trace) {
  std::ostringstream out;
  const std::size_t n = trace.states.empty() ? 0 : trace.states.front().size();
  out << "step,time,energy,residual";
  for (std::size_t i = 0; i < n; ++i) out << ",v" << i;
  out << '\n';
  char buf[40];
  auto num = [&buf](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  for (std::size_t k = 0; k < trace.states.size(); ++k) {
    out << k << ',' << num(static_cast<double>(k) * trace.tau) << ','
        << num(trace.energies[k].value()) << ','
        << num(k == 0 ? 0.0 : trace.residuals[k - 1]);
    for (double v : trace.states[k].values()) out << ',' << num(v);
    out << '\n';
  }
  return out.str();
}

}  // namespace ndf
