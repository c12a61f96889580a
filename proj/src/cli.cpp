#include "ndf/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ndf/contraction.hpp"
#include "ndf/error.hpp"
#include "ndf/flow.hpp"
#include "ndf/forms.hpp"
#include "ndf/report.hpp"
#include "ndf/sampling.hpp"
#include "ndf/verifier.hpp"

namespace ndf::cli {

namespace {

constexpr int kOk = 0;
constexpr int kViolation = 1;
constexpr int kUsage = 2;

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::BadSpec, what); }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) bad("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) bad("cannot write '" + path + "'");
  out << text;
  if (!out) bad("cannot write '" + path + "'");
}

json load_json(const std::string& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    bad(path + ": " + e.what());
  }
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string bracket(std::span<const double> xs) {
  std::string s = "[";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i > 0) s += ',';
    s += num(xs[i]);
  }
  return s + "]";
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) bad("not a number: '" + item + "'");
    out.push_back(v);
  }
  return out;
}

struct RunConfig {
  std::uint64_t seed = 0;
  std::vector<FormInstance> forms;
  json root;
};

RunConfig load_config(const std::string& path) {
  RunConfig rc;
  rc.root = load_json(path);
  if (!rc.root.is_object()) bad("config must be a JSON object");
  if (rc.root.contains("seed")) {
    if (!rc.root["seed"].is_number_unsigned()) bad("seed must be a non-negative integer");
    rc.seed = rc.root["seed"].get<std::uint64_t>();
  }
  const json& forms = rc.root.contains("forms") ? rc.root["forms"] : json();
  if (!forms.is_array() || forms.empty()) bad("config needs a non-empty 'forms' list");
  for (std::size_t i = 0; i < forms.size(); ++i) {
    rc.forms.push_back(make_form(descriptor_from_json(forms[i], i)));
  }
  return rc;
}

std::string output_path(const json& root, const char* key, const std::string& flag) {
  if (!flag.empty()) return flag;
  if (root.contains("output") && root["output"].contains(key)) {
    return root["output"][key].get<std::string>();
  }
  return {};
}

int emit_report(std::uint64_t seed, const std::vector<CheckResult>& results,
                const std::string& path) {
  const std::string text = report_json(seed, results) + "\n";
  std::size_t failed = 0;
  for (const auto& r : results) failed += r.passed ? 0 : 1;
  if (path.empty()) {
    std::cout << text;
  } else {
    write_file(path, text);
  }
  for (const auto& r : results) {
    if (!r.passed) {
      std::cerr << "FAIL " << r.name << " worst_violation=" << num(r.worst_violation) << "\n";
    }
  }
  std::cerr << failed << " of " << results.size() << " checks failed";
  if (!path.empty()) std::cerr << "; report: " << path;
  std::cerr << "\n";
  return failed == 0 ? kOk : kViolation;
}

int cmd_verify(const std::string& config, const std::string& out) {
  const RunConfig rc = load_config(config);
  const SuiteConfig suite =
      suite_from_json(rc.root.contains("suite") ? rc.root["suite"] : json(), rc.seed);
  return emit_report(rc.seed, run_suite(rc.forms, suite), output_path(rc.root, "report", out));
}

int cmd_decompose(const std::string& breakpoints) {
  const PLFunction phi = make_phi(parse_list(breakpoints));
  const Decomposition d = decompose(phi);
  std::cout << "factors:";
  if (d.factors.empty()) std::cout << " []";
  for (const auto& f : d.factors) std::cout << ' ' << bracket(f.breakpoints());
  std::cout << "\nresidual: " << bracket(d.residual.breakpoints()) << "\n";
  return kOk;
}

int cmd_envelope(const std::string& samples_path, double radius) {
  const json j = load_json(samples_path);
  if (!j.is_array()) bad("samples file must hold a JSON array");
  std::vector<EnvelopeSample> samples;
  for (const auto& s : j) {
    if (s.is_array() && s.size() == 2 && s[0].is_number() && s[1].is_number()) {
      samples.push_back({s[0].get<double>(), s[1].get<double>()});
    } else if (s.is_object() && s.contains("y") && s.contains("value")) {
      samples.push_back({s["y"].get<double>(), s["value"].get<double>()});
    } else {
      bad("each sample is [y, value] or {\"y\": .., \"value\": ..}");
    }
  }
  std::cout << dump_canonical(to_json(envelope(samples, radius))) << "\n";
  return kOk;
}

int cmd_flow(const std::string& config, const std::string& out) {
  const RunConfig rc = load_config(config);
  if (!rc.root.contains("flow")) bad("flow config needs a 'flow' object");
  const FlowConfig fc = flow_from_json(rc.root["flow"]);
  const FormInstance& form = rc.forms.front();
  Field u0 = Field::zero(form.space());
  if (rc.root.contains("initial")) {
    const json& init = rc.root["initial"];
    if (!init.is_array()) bad("'initial' must be an array of node values");
    std::vector<double> vals;
    for (const auto& v : init) {
      if (!v.is_number()) bad("'initial' must be an array of node values");
      vals.push_back(v.get<double>());
    }
    if (vals.size() != form.space()->size()) bad("'initial' length differs from the node count");
    u0 = Field(form.space(), std::move(vals));
  } else {
    Rng rng = Rng::stream(rc.seed, "flow.initial");
    u0 = sample_field(form.space(), rng, FieldSamplerSpec{});
  }
  const FlowTrace trace = evolve(form, u0, fc);
  const std::string path = output_path(rc.root, "trace", out);
  if (path.empty()) {
    std::cout << trace_csv(trace);
  } else {
    write_file(path, trace_csv(trace));
  }
  return kOk;
}

int cmd_demo(const std::string& which, const std::string& out) {
  if (which != "counterexample") bad("unknown demo '" + which + "'");
  const CheckResult r = counterexample_demo();
  std::cout << "E(f) = " << num(r.witness.scalars.at("energy_f")) << "\n"
            << "E(-f) = " << num(r.witness.scalars.at("energy_neg_f")) << "\n";
  return emit_report(0, {r}, out);
}

/// CLI11 reads "-1,0,2" as a flag; glue such values to their option.
std::vector<std::string> normalize_args(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) {
    std::string a = argv[i];
    if ((a == "--breakpoints" || a == "--radius") && i + 1 < argc) {
      a += "=";
      a += argv[++i];
    }
    args.push_back(std::move(a));
  }
  return args;
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Non-bilinear Dirichlet forms on finite measure spaces"};
  app.require_subcommand(1);

  std::string config;
  std::string out;
  std::string breakpoints;
  std::string samples;
  std::string demo;
  double radius = 0.0;

  auto* verify = app.add_subcommand("verify", "Run the check suite and write a JSON report");
  verify->add_option("config", config, "JSON config")->required();
  verify->add_option("--out", out, "Report path (default: stdout)");

  auto* decomp = app.add_subcommand("decompose", "Factor an alternating contraction into F2 pieces");
  decomp->add_option("--breakpoints", breakpoints, "Comma-separated breakpoints")->required();

  auto* env = app.add_subcommand("envelope", "Print the 1-Lipschitz envelope of samples");
  env->add_option("--samples", samples, "JSON file of [y, value] pairs")->required();
  env->add_option("--radius", radius, "Truncation radius")->required();

  auto* flow = app.add_subcommand("flow", "Run the proximal flow and write a CSV trace");
  flow->add_option("config", config, "JSON config")->required();
  flow->add_option("--out", out, "Trace path (default: stdout)");

  auto* dm = app.add_subcommand("demo", "Run a built-in demonstration");
  dm->add_option("name", demo, "counterexample")->required();
  dm->add_option("--out", out, "Report path (default: stdout)");

  std::vector<std::string> args = normalize_args(argc, argv);
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*verify) return cmd_verify(config, out);
    if (*decomp) return cmd_decompose(breakpoints);
    if (*env) return cmd_envelope(samples, radius);
    if (*flow) return cmd_flow(config, out);
    return cmd_demo(demo, out);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::NoConvergence ? kViolation : kUsage;
  } catch (const json::exception& e) {
    std::cerr << "error: BadSpec: " << e.what() << "\n";
    return kUsage;
  }
}

}  // namespace ndf::cli
