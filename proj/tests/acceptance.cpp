// Acceptance run: one PASS/FAIL line per criterion; exit status 1 if any fail.

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "ndf/contraction.hpp"
#include "ndf/flow.hpp"
#include "ndf/forms.hpp"
#include "ndf/lattice.hpp"
#include "ndf/report.hpp"
#include "ndf/sampling.hpp"
#include "ndf/verifier.hpp"

using namespace ndf;

namespace {

struct Outcome {
  bool passed;
  std::string detail;
};

int failures = 0;

void criterion(int id, const char* title, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o{false, ""};
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (budget_s > 0 && secs > budget_s) {
    o.passed = false;
    o.detail += " [over time budget]";
  }
  if (!o.passed) ++failures;
  std::printf("criterion %d: %s  %s  (%.2fs)  %s\n", id, o.passed ? "PASS" : "FAIL", title, secs,
              o.detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

struct Instance {
  FormInstance form;
  bool symmetric;
};

std::vector<Instance> shipped() {
  std::vector<Instance> out;
  auto add = [&out](FormDescriptor d, bool sym) { out.push_back({make_form(std::move(d)), sym}); };
  add({"graph", 20, std::nullopt, random_graph(20, 0.2, 1)}, true);
  add({"nonlocal_square", 10, std::nullopt, NonlocalPsi{{}, {PsiKind::Square, 2}}}, true);
  add({"nonlocal_quartic", 10, std::nullopt, NonlocalPsi{{}, {PsiKind::Quartic, 4}}}, true);
  add({"nonlocal_abs", 10, std::nullopt, NonlocalPsi{{}, {PsiKind::Abs, 1}}}, true);
  for (double p : {1.0, 2.0, 4.0}) {
    add({"grid_p" + std::to_string(static_cast<int>(p)), 11, std::nullopt,
         LocalGrid1D{0.1, AbsPower{p}}},
        true);
  }
  Rng rng(77);
  std::vector<double> a(10);
  for (auto& x : a) x = rng.uniform(0.5, 2.0);
  add({"finsler", 11, std::nullopt, LocalGrid1D{0.1, FinslerWeighted{a}}}, true);
  add({"max_positive_part", 11, std::nullopt, LocalGrid1D{0.1, MaxPositivePart{}}}, false);
  return out;
}

SuiteConfig suite(std::size_t n, std::uint64_t seed = 2024) {
  SuiteConfig cfg;
  cfg.n_samples = n;
  cfg.seed = seed;
  return cfg;
}

Outcome decomposition_round_trip() {
  Rng rng = Rng::stream(1, "acceptance.decompose");
  double worst = 0.0;
  std::size_t bad_count = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t k = rng.index(0, 15);
    std::vector<double> x(k);
    for (auto& v : x) v = rng.uniform(-10, 10);
    std::sort(x.begin(), x.end());
    const PLFunction phi = make_phi(x);
    const Decomposition d = decompose(phi);
    if (d.factors.size() != k / 2) ++bad_count;
    const PLFunction back = recompose(d);
    for (int i = 0; i < 10000; ++i) {
      const double t = -20.0 + 40.0 * i / 9999.0;
      worst = std::max(worst, std::abs(back(t) - phi(t)));
    }
  }
  return {worst <= 1e-9 && bad_count == 0,
          "max error " + fmt("%.3g", worst) + ", wrong factor counts " + std::to_string(bad_count)};
}

Outcome envelope_convergence() {
  Rng rng = Rng::stream(2, "acceptance.envelope");
  ContractionSamplerSpec spec;
  spec.breakpoint_range = 4.0;
  double worst_ratio = 0.0;
  double worst_below = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const PLFunction phi = sample_contraction(rng, spec);
    for (int n = 2; n <= 8; ++n) {
      const double step = std::ldexp(1.0, -n);
      std::vector<EnvelopeSample> samples;
      for (int j = -(4 << n); j <= (4 << n); ++j) {
        const double y = j * step;
        samples.push_back({y, y == 0.0 ? 0.0 : phi(y)});
      }
      const PLFunction env = envelope(samples, 4.0);
      // Both maps are piecewise linear, so the sup over [-4, 4] is attained at
      // a breakpoint of either one or at an endpoint.
      std::vector<double> pts{-4.0, 4.0};
      for (double b : phi.breakpoints()) pts.push_back(b);
      for (double b : env.breakpoints()) pts.push_back(b);
      for (double t : pts) {
        if (t < -4.0 || t > 4.0) continue;
        const double diff = env(t) - phi(t);
        worst_ratio = std::max(worst_ratio, std::abs(diff) / (2.0 * step));
        worst_below = std::max(worst_below, -diff);
      }
    }
  }
  return {worst_ratio <= 1.0 && worst_below <= 1e-12,
          "max |phi_n - phi| / (2*2^-n) = " + fmt("%.3g", worst_ratio) +
              ", max (phi - phi_n) = " + fmt("%.3g", worst_below)};
}

Outcome dirichlet_criteria(const std::vector<Instance>& forms) {
  bool ok = true;
  std::string detail;
  for (const auto& inst : forms) {
    const auto rs = check_criteria(inst.form, suite(500));
    double worst = -INFINITY;
    for (std::size_t i = 0; i < 4; ++i) {  // minmax, hk, prcr1, prcr2
      worst = std::max(worst, rs[i].worst_violation);
      ok = ok && rs[i].worst_violation <= 1e-9 && rs[i].n_tested == 500;
    }
    detail += inst.form.name() + "=" + fmt("%.2g", worst) + " ";
  }
  return {ok, "worst violation: " + detail};
}

Outcome normal_contraction_positive(const std::vector<Instance>& forms) {
  bool ok = true;
  std::string detail;
  for (const auto& inst : forms) {
    if (!inst.symmetric) continue;
    const auto r = check_normal_contraction(inst.form, suite(200));
    ok = ok && r.passed && r.worst_violation <= 1e-9;
    detail += inst.form.name() + "=" + fmt("%.2g", r.worst_violation) + " ";
  }
  return {ok, "worst violation: " + detail};
}

Outcome necessity(const std::vector<Instance>& forms) {
  const FormInstance& form = forms.back().form;
  const auto rs = check_criteria(form, suite(500));
  const bool sym_fails = !rs[4].passed;
  const bool nc_fails = !check_normal_contraction(form, suite(200)).passed;
  const CheckResult demo = counterexample_demo();
  const double ef = demo.witness.scalars.at("energy_f");
  const double enf = demo.witness.scalars.at("energy_neg_f");
  const bool exact = ef == 0.0 && std::abs(enf - 1.0) <= 1e-12 && !demo.passed;

  const std::string cmd = std::string(NDF_CLI) + " demo counterexample >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return {sym_fails && nc_fails && exact && code == 1,
          "symmetry fails: " + std::string(sym_fails ? "yes" : "no") +
              ", normal contraction fails: " + (nc_fails ? "yes" : "no") + ", E(f)=" +
              fmt("%.17g", ef) + ", E(-f)=" + fmt("%.17g", enf) + ", demo exit " +
              std::to_string(code)};
}

Outcome proof_chain(const std::vector<Instance>& forms) {
  bool ok = true;
  double worst = -INFINITY;
  std::string worst_name;
  std::size_t n_checks = 0;
  for (const auto& inst : forms) {
    if (!inst.symmetric) continue;
    for (const auto& r : run_proof_chain(inst.form, suite(200))) {
      ++n_checks;
      ok = ok && r.worst_violation <= 1e-9 && r.n_tested == 200;
      if (r.worst_violation > worst) {
        worst = r.worst_violation;
        worst_name = r.name;
      }
    }
  }
  return {ok, std::to_string(n_checks) + " displays, worst " + fmt("%.3g", worst) + " at " +
                  worst_name};
}

Outcome identity_suite() {
  SuiteConfig cfg = suite(1000);
  cfg.identity_tol = 1e-12;
  bool ok = true;
  std::string detail;
  for (const auto& r : check_identities(cfg)) {
    const bool required = r.name != "identities.twist_condition_t_plus_s_le_1";
    if (required) ok = ok && r.passed && r.worst_violation <= 1e-12;
    detail += r.name.substr(std::string("identities.").size()) + "=" +
              (r.passed ? "ok" : "FAIL") + "(" + fmt("%.3g", r.worst_violation) + ") ";
  }
  return {ok, detail};
}

std::vector<double> dense_resolvent(const FormInstance& form, const Field& u, double tau) {
  const auto& g = std::get<GraphQuadratic>(form.descriptor().kind);
  const auto n = static_cast<Eigen::Index>(u.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double m = form.space()->weight(static_cast<std::size_t>(i));
    a(i, i) = m;
    rhs[i] = m * u[static_cast<std::size_t>(i)];
  }
  for (const auto& e : g.edges) {
    const auto i = static_cast<Eigen::Index>(e.a);
    const auto j = static_cast<Eigen::Index>(e.b);
    a(i, i) += tau * e.w;
    a(j, j) += tau * e.w;
    a(i, j) -= tau * e.w;
    a(j, i) -= tau * e.w;
  }
  const Eigen::VectorXd v = a.partialPivLu().solve(rhs);
  return {v.data(), v.data() + v.size()};
}

Outcome flow_suite() {
  const FlowConfig cfg{0.01, 100, 1e-9};
  const double slack = 10 * cfg.inner_tol;
  std::vector<FormInstance> forms{
      make_form({"graph", 20, std::nullopt, random_graph(20, 0.2, 3)}),
      make_form({"nonlocal_quartic", 10, std::nullopt, NonlocalPsi{{}, {PsiKind::Quartic, 4}}})};
  Rng rng = Rng::stream(8, "acceptance.flow");
  double energy_rise = -INFINITY;
  double order_gap = 0.0;
  double contraction_gap = -INFINITY;
  double resolvent_err = 0.0;
  for (const auto& form : forms) {
    const bool graph = std::holds_alternative<GraphQuadratic>(form.descriptor().kind);
    for (int pair = 0; pair < 20; ++pair) {
      const Field f = sample_field(form.space(), rng, {});
      const Field bump = sample_field(form.space(), rng, {}).map([](double x) { return std::abs(x); });
      const Field g = f + bump;
      const Field h = sample_field(form.space(), rng, {});
      const FlowTrace tf = evolve(form, f, cfg);
      const FlowTrace tg = evolve(form, g, cfg);
      const FlowTrace th = evolve(form, h, cfg);
      const double d0 = linf_norm(f - h);
      for (const FlowTrace* t : {&tf, &tg, &th}) {
        for (std::size_t k = 0; k + 1 < t->energies.size(); ++k) {
          energy_rise = std::max(energy_rise, t->energies[k + 1].value() - t->energies[k].value());
        }
        if (graph) {
          for (std::size_t k = 0; k + 1 < t->states.size(); ++k) {
            const auto want = dense_resolvent(form, t->states[k], cfg.tau);
            for (std::size_t i = 0; i < want.size(); ++i) {
              resolvent_err = std::max(resolvent_err, std::abs(t->states[k + 1][i] - want[i]));
            }
          }
        }
      }
      for (std::size_t k = 0; k < tf.states.size(); ++k) {
        const Field neg = (tg.states[k] - tf.states[k]).map([](double x) { return std::min(x, 0.0); });
        order_gap = std::max(order_gap, linf_norm(neg));
        contraction_gap = std::max(contraction_gap, linf_norm(tf.states[k] - th.states[k]) - d0);
      }
    }
  }

  const FormInstance pair =
      make_form({"pair", 2, std::vector<double>{1, 1}, GraphQuadratic{{{0, 1, 1.0}}}});
  const Field v = prox_step(pair, Field(pair.space(), {1, 0}), 0.5);
  const double two_node = std::max(std::abs(v[0] - 0.75), std::abs(v[1] - 0.25));

  const bool ok = energy_rise <= 1e-10 && order_gap <= slack && contraction_gap <= slack &&
                  resolvent_err <= 1e-8 && two_node <= 1e-12;
  return {ok, "max energy rise " + fmt("%.3g", energy_rise) + ", order gap " +
                  fmt("%.3g", order_gap) + ", sup-norm excess " + fmt("%.3g", contraction_gap) +
                  ", resolvent error " + fmt("%.3g", resolvent_err) + ", two-node error " +
                  fmt("%.3g", two_node)};
}

std::string read_all(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / ("ndf_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const fs::path cfg = dir / "config.json";
  std::ofstream(cfg) << R"({
    "seed": 31,
    "forms": [
      {"name": "graph", "kind": "graph_quadratic", "nodes": 20, "random": {"edge_prob": 0.2, "seed": 1}},
      {"name": "quartic", "kind": "nonlocal_psi", "nodes": 8, "psi": {"name": "quartic"}},
      {"name": "tv", "kind": "local_grid_1d", "nodes": 11, "h": 0.1, "integrand": {"name": "abs_power", "p": 1}},
      {"name": "max_pos", "kind": "local_grid_1d", "nodes": 11, "h": 0.1, "integrand": {"name": "max_positive_part"}}
    ],
    "suite": {"n_samples": 300}
  })";
  std::vector<std::string> reports;
  for (int i = 0; i < 3; ++i) {
    const fs::path out = dir / ("report" + std::to_string(i) + ".json");
    const std::string cmd = std::string(NDF_CLI) + " verify " + cfg.string() + " --out " +
                            out.string() + " >/dev/null 2>&1";
    [[maybe_unused]] const int rc = std::system(cmd.c_str());
    reports.push_back(read_all(out.string()));
  }
  fs::remove_all(dir);
  const bool same = !reports[0].empty() && reports[0] == reports[1] && reports[1] == reports[2];
  return {same, std::to_string(reports[0].size()) + "-byte report, 3 runs " +
                    (same ? "identical" : "differ")};
}

}  // namespace

int main() {
  const auto forms = shipped();
  criterion(1, "decomposition round trip", 10, decomposition_round_trip);
  criterion(2, "envelope convergence", 0, envelope_convergence);
  criterion(3, "Dirichlet criteria on shipped instances", 60, [&] { return dirichlet_criteria(forms); });
  criterion(4, "normal contraction on symmetric instances", 0,
            [&] { return normal_contraction_positive(forms); });
  criterion(5, "counterexample (necessity)", 0, [&] { return necessity(forms); });
  criterion(6, "proof-chain inequalities", 0, [&] { return proof_chain(forms); });
  criterion(7, "identity suite", 0, identity_suite);
  criterion(8, "flow suite", 120, flow_suite);
  criterion(9, "determinism", 0, determinism);
  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
