#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "ndf/error.hpp"
#include "ndf/flow.hpp"
#include "ndf/lattice.hpp"
#include "ndf/sampling.hpp"

using namespace ndf;

namespace {

FormInstance pair_graph() {
  return make_form({"pair", 2, std::vector<double>{1, 1}, GraphQuadratic{{{0, 1, 1.0}}}});
}

// Solves (M + tau L) v = M u by Gaussian elimination with partial pivoting.
std::vector<double> graph_resolvent(const GraphQuadratic& g, const std::vector<double>& m,
                                    const std::vector<double>& u, double tau) {
  const std::size_t n = u.size();
  std::vector<std::vector<double>> a(n, std::vector<double>(n + 1, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    a[i][i] = m[i];
    a[i][n] = m[i] * u[i];
  }
  for (const auto& e : g.edges) {
    a[e.a][e.a] += tau * e.w;
    a[e.b][e.b] += tau * e.w;
    a[e.a][e.b] -= tau * e.w;
    a[e.b][e.a] -= tau * e.w;
  }
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    }
    std::swap(a[c], a[piv]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k <= n; ++k) a[r][k] -= f * a[c][k];
    }
  }
  std::vector<double> v(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = a[i][n];
    for (std::size_t k = i + 1; k < n; ++k) s -= a[i][k] * v[k];
    v[i] = s / a[i][i];
  }
  return v;
}

std::vector<FormInstance> catalog() {
  std::vector<FormInstance> out;
  out.push_back(make_form({"graph", 12, std::nullopt, random_graph(12, 0.3, 2)}));
  out.push_back(make_form({"quartic", 6, std::nullopt, NonlocalPsi{{}, {PsiKind::Quartic, 4}}}));
  out.push_back(make_form({"abs", 6, std::nullopt, NonlocalPsi{{}, {PsiKind::Abs, 1}}}));
  out.push_back(make_form({"p1", 8, std::nullopt, LocalGrid1D{0.125, AbsPower{1}}}));
  out.push_back(make_form({"p4", 8, std::nullopt, LocalGrid1D{0.125, AbsPower{4}}}));
  out.push_back(make_form({"finsler", 6, std::nullopt, LocalGrid1D{0.2, FinslerWeighted{{1, 2, 0.5, 1.5, 1}}}}));
  out.push_back(make_form({"maxpos", 8, std::nullopt, LocalGrid1D{0.125, MaxPositivePart{}}}));
  return out;
}

}  // namespace

TEST_CASE("two-node resolvent") {
  auto g = pair_graph();
  Field u(g.space(), {1, 0});
  Field v = prox_step(g, u, 0.5);
  CHECK(std::abs(v[0] - 0.75) <= 1e-12);
  CHECK(std::abs(v[1] - 0.25) <= 1e-12);

  auto trace = evolve(g, u, FlowConfig{0.5, 2});
  REQUIRE(trace.states.size() == 3);
  CHECK(std::abs(trace.states[2][0] - 0.625) <= 1e-12);
  CHECK(std::abs(trace.states[2][1] - 0.375) <= 1e-12);
  CHECK(trace.energies[0].value() > trace.energies[1].value());
  CHECK(trace.energies[1].value() > trace.energies[2].value());
  CHECK(trace.residuals.size() == 2);
}

TEST_CASE("trivial resolvents") {
  auto empty = make_form({"empty", 3, std::nullopt, GraphQuadratic{}});
  Field u(empty.space(), {1, -2, 3});
  CHECK(linf_norm(prox_step(empty, u, 0.3) - u) == 0.0);
  for (const auto& form : catalog()) {
    CAPTURE(form.name());
    Field c = Field::constant(form.space(), 1.5);
    CHECK(linf_norm(prox_step(form, c, 0.1) - c) <= 1e-12);
  }
}

TEST_CASE("graph steps match the dense weighted resolvent") {
  const auto g = random_graph(20, 0.2, 9);
  std::vector<double> m(20);
  Rng rng(1);
  for (auto& w : m) w = rng.uniform(0.5, 2.0);
  auto form = make_form({"graph", 20, m, g});
  Field u = sample_field(form.space(), rng, {});
  auto trace = evolve(form, u, FlowConfig{0.05, 20});
  for (std::size_t k = 0; k + 1 < trace.states.size(); ++k) {
    const auto want = graph_resolvent(
        g, m, std::vector<double>(trace.states[k].values().begin(), trace.states[k].values().end()),
        0.05);
    for (std::size_t i = 0; i < want.size(); ++i) {
      CHECK(std::abs(trace.states[k + 1][i] - want[i]) <= 1e-8);
    }
  }
}

TEST_CASE("evolve composes prox steps") {
  auto form = catalog()[3];
  Rng rng(4);
  Field u = sample_field(form.space(), rng, {});
  auto one = evolve(form, u, FlowConfig{0.02, 1});
  CHECK(linf_norm(one.states[0] - u) == 0.0);
  CHECK(linf_norm(one.states[1] - prox_step(form, u, 0.02)) == 0.0);

  auto five = evolve(form, u, FlowConfig{0.02, 5});
  auto two = evolve(form, u, FlowConfig{0.02, 2});
  auto three = evolve(form, two.states.back(), FlowConfig{0.02, 3});
  for (std::size_t k = 0; k <= 2; ++k) CHECK(linf_norm(five.states[k] - two.states[k]) == 0.0);
  for (std::size_t k = 0; k <= 3; ++k) {
    CHECK(linf_norm(five.states[2 + k] - three.states[k]) == 0.0);
  }
}

TEST_CASE("energies never increase") {
  Rng rng(5);
  for (const auto& form : catalog()) {
    CAPTURE(form.name());
    for (int trial = 0; trial < 10; ++trial) {
      auto trace = evolve(form, sample_field(form.space(), rng, {}), FlowConfig{0.01, 10});
      for (std::size_t k = 0; k + 1 < trace.energies.size(); ++k) {
        CHECK(trace.energies[k + 1].value() <= trace.energies[k].value() + 1e-10);
      }
    }
  }
}

TEST_CASE("order preservation and sup-norm contraction") {
  Rng rng(6);
  const FlowConfig cfg{0.01, 10};
  const double slack = 10 * cfg.inner_tol;
  for (const auto& form : catalog()) {
    CAPTURE(form.name());
    for (int trial = 0; trial < 4; ++trial) {
      Field f = sample_field(form.space(), rng, {});
      Field bump = sample_field(form.space(), rng, {}).map([](double x) { return std::abs(x); });
      Field g = f + bump;
      Field h = sample_field(form.space(), rng, {});
      auto tf = evolve(form, f, cfg);
      auto tg = evolve(form, g, cfg);
      auto th = evolve(form, h, cfg);
      const double d0 = linf_norm(f - h);
      for (std::size_t k = 0; k < tf.states.size(); ++k) {
        const Field neg = (tg.states[k] - tf.states[k]).map([](double x) { return std::min(x, 0.0); });
        CHECK(linf_norm(neg) <= slack);
        CHECK(linf_norm(tf.states[k] - th.states[k]) <= d0 + slack);
      }
    }
  }
}

TEST_CASE("flow errors") {
  auto g = pair_graph();
  Field u(g.space(), {1, 0});
  CHECK_THROWS_AS(prox_step(g, Field(make_space({1, 2}), {1, 0}), 0.5), Error);
  CHECK_THROWS_AS(evolve(g, u, FlowConfig{0.0, 1}), Error);
  CHECK_THROWS_AS(evolve(g, u, FlowConfig{0.1, 0}), Error);
  CHECK_THROWS_AS(evolve(g, u, FlowConfig{0.1, 1, -1.0}), Error);

  auto tv = catalog()[3];
  Rng rng(2);
  Field w = sample_field(tv.space(), rng, {});
  try {
    evolve(tv, w, FlowConfig{0.1, 3, 1e-9, 1});
    FAIL("expected NoConvergence");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoConvergence);
    CHECK(std::string(e.what()).find("step 0") != std::string::npos);
  }
}
