#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "ndf/error.hpp"
#include "ndf/forms.hpp"
#include "ndf/sampling.hpp"

using namespace ndf;

namespace {

FormDescriptor grid(std::size_t nodes, double h, Integrand f, std::string name = "grid") {
  return {std::move(name), nodes, std::nullopt, LocalGrid1D{h, std::move(f)}};
}

FormDescriptor nonlocal(std::size_t nodes, Psi psi) {
  return {"nonlocal", nodes, std::nullopt, NonlocalPsi{{}, psi}};
}

FormDescriptor pair_graph() {
  return {"pair", 2, std::vector<double>{1, 1}, GraphQuadratic{{{0, 1, 1.0}}}};
}

ErrorCode code_of(FormDescriptor d) {
  try {
    make_form(std::move(d));
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::PreconditionFailed;
}

std::vector<FormInstance> catalog() {
  std::vector<FormInstance> out;
  out.push_back(make_form({"graph", 20, std::nullopt, random_graph(20, 0.2, 4)}));
  out.push_back(make_form(nonlocal(8, {PsiKind::Square, 2})));
  out.push_back(make_form(nonlocal(8, {PsiKind::Quartic, 4})));
  out.push_back(make_form(nonlocal(8, {PsiKind::Abs, 1})));
  out.push_back(make_form(nonlocal(6, {PsiKind::Power, 3})));
  for (double p : {1.0, 2.0, 4.0}) out.push_back(make_form(grid(11, 0.1, AbsPower{p})));
  out.push_back(make_form(grid(6, 0.2, FinslerWeighted{{1, 2, 0.5, 1.5, 1}})));
  out.push_back(make_form(grid(11, 0.1, MaxPositivePart{})));
  return out;
}

}  // namespace

TEST_CASE("make_form") {
  CHECK(make_form(pair_graph()).terms().size() == 1);
  CHECK(make_form(nonlocal(4, {PsiKind::Quartic, 4})).terms().size() == 12);
  CHECK(code_of(grid(5, 0.0, AbsPower{2})) == ErrorCode::BadSpec);
  CHECK(code_of(grid(5, -1.0, AbsPower{2})) == ErrorCode::BadSpec);
  CHECK(code_of(grid(5, 0.1, AbsPower{0.5})) == ErrorCode::BadSpec);
  CHECK(code_of(grid(5, 0.1, FinslerWeighted{{1, 1}})) == ErrorCode::BadSpec);
  CHECK(code_of(grid(3, 0.1, FinslerWeighted{{1, -1}})) == ErrorCode::BadSpec);
  CHECK(code_of({"g", 2, std::nullopt, GraphQuadratic{{{0, 2, 1.0}}}}) == ErrorCode::BadSpec);
  CHECK(code_of({"g", 2, std::nullopt, GraphQuadratic{{{0, 1, -1.0}}}}) == ErrorCode::BadSpec);
  CHECK(code_of({"g", 0, std::nullopt, GraphQuadratic{}}) == ErrorCode::BadSpec);
  CHECK(code_of({"g", 2, std::vector<double>{1}, GraphQuadratic{}}) == ErrorCode::BadSpec);
  CHECK(code_of({"n", 2, std::nullopt, NonlocalPsi{{{0, 1}}, {}}}) == ErrorCode::BadSpec);
  CHECK(code_of({"n", 2, std::nullopt, NonlocalPsi{{}, {PsiKind::Power, 0.5}}}) == ErrorCode::BadSpec);
}

TEST_CASE("hand-evaluated energies") {
  auto g = make_form(pair_graph());
  CHECK(energy(g, Field(g.space(), {1, 0})) == 0.5);

  auto s3 = [](const FormInstance& f, std::vector<double> v) {
    return energy(f, Field(f.space(), std::move(v)));
  };
  CHECK(s3(make_form(nonlocal(3, {PsiKind::Square, 2})), {0, 1, 3}) == 28);
  CHECK(s3(make_form(nonlocal(3, {PsiKind::Quartic, 4})), {0, 1, 3}) == 196);
  CHECK(s3(make_form(nonlocal(3, {PsiKind::Abs, 1})), {0, 1, 3}) == 12);
  CHECK(s3(make_form(nonlocal(3, {PsiKind::Power, 3})), {0, 1, 3}) == doctest::Approx(72));
  CHECK(s3(make_form(grid(3, 0.5, AbsPower{2})), {0, 1, 1}) == 1);
  CHECK(s3(make_form(grid(3, 0.5, FinslerWeighted{{1, 2}})), {0, 1, 3}) == 5);

  FormDescriptor weighted{"w", 3, std::nullopt, NonlocalPsi{{{0, 2, 0}, {0, 0, 1}, {0, 0, 0}}, {}}};
  CHECK(s3(make_form(weighted), {0, 1, 3}) == 2 * 1 + 1 * 4);
}

TEST_CASE("counterexample energies") {
  auto f = make_form(grid(11, 0.1, MaxPositivePart{}));
  std::vector<double> ramp(11);
  for (std::size_t i = 0; i < 11; ++i) ramp[i] = 0.0 - static_cast<double>(i) / 10.0;
  Field u(f.space(), ramp);
  CHECK(energy(f, u) == 0.0);
  CHECK(energy(f, -u) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(f.space()->weight(0) == 0.1);
  CHECK_FALSE(f.symmetric_by_construction());
}

TEST_CASE("constants have zero energy and energies are nonnegative") {
  Rng rng(6);
  for (const auto& form : catalog()) {
    CAPTURE(form.name());
    CHECK(energy(form, Field::zero(form.space())) == 0.0);
    CHECK(energy(form, Field::constant(form.space(), 3.7)) == 0.0);
    for (int i = 0; i < 100; ++i) {
      CHECK(energy(form, sample_field(form.space(), rng, {})) >= 0.0);
    }
  }
}

TEST_CASE("sampled convexity") {
  Rng rng(7);
  for (const auto& form : catalog()) {
    CAPTURE(form.name());
    for (int i = 0; i < 500; ++i) {
      Field f = sample_field(form.space(), rng, {});
      Field g = sample_field(form.space(), rng, {});
      const double mid = energy(form, 0.5 * f + 0.5 * g);
      CHECK(mid <= 0.5 * energy(form, f) + 0.5 * energy(form, g) + 1e-9);
    }
  }
}

TEST_CASE("eval_form rejects foreign fields") {
  auto g = make_form(pair_graph());
  CHECK_THROWS_AS(eval_form(g, Field(make_space({1, 2}), {1, 0})), Error);
}

TEST_CASE("symmetry sampling") {
  auto g = make_form({"graph", 20, std::nullopt, random_graph(20, 0.2, 1)});
  auto rg = is_symmetric_sampled(g, 200, 0);
  CHECK(rg.symmetric);
  CHECK(rg.worst_asymmetry == 0.0);
  CHECK(is_symmetric_sampled(make_form(nonlocal(8, {PsiKind::Quartic, 4})), 200, 0).symmetric);

  auto m = make_form(grid(11, 0.1, MaxPositivePart{}));
  auto rm = is_symmetric_sampled(m, 200, 0);
  CHECK_FALSE(rm.symmetric);
  REQUIRE(rm.witness.size() == 11);
  Field w(m.space(), rm.witness);
  CHECK(std::abs(energy(m, -w) - energy(m, w)) == rm.worst_asymmetry);
}

TEST_CASE("discrete locality") {
  auto f = make_form(grid(9, 0.5, AbsPower{2}));
  // u varies on the left edges only, v on the right edges only.
  Field u(f.space(), {0.5, -1.25, 2, 0.75, 0.75, 0.75, 0.75, 0.75, 0.75});
  Field v(f.space(), {-2, -2, -2, -2, -2, 1.5, 0.25, -0.125, 3});
  CHECK(energy(f, u + v) == energy(f, u) + energy(f, v));

  Rng rng(12);
  for (const auto& form : catalog()) {
    if (!std::holds_alternative<LocalGrid1D>(form.descriptor().kind)) continue;
    const std::size_t n = form.space()->size();
    for (int trial = 0; trial < 100; ++trial) {
      const std::size_t cut = rng.index(1, n - 1);
      std::vector<double> a(n), b(n);
      const double ca = rng.uniform(-1, 1);
      const double cb = rng.uniform(-1, 1);
      for (std::size_t i = 0; i < n; ++i) {
        a[i] = i < cut ? rng.uniform(-2, 2) : ca;
        b[i] = i <= cut ? cb : rng.uniform(-2, 2);
      }
      Field fa(form.space(), a);
      Field fb(form.space(), b);
      CHECK(energy(form, fa + fb) == doctest::Approx(energy(form, fa) + energy(form, fb)).epsilon(1e-14));
    }
  }
}

TEST_CASE("random_graph is connected and reproducible") {
  auto a = random_graph(15, 0.1, 3);
  auto b = random_graph(15, 0.1, 3);
  REQUIRE(a.edges.size() == b.edges.size());
  CHECK(a.edges.size() >= 14);
  for (std::size_t i = 0; i < a.edges.size(); ++i) {
    CHECK(a.edges[i].a == b.edges[i].a);
    CHECK(a.edges[i].w == b.edges[i].w);
    CHECK(a.edges[i].w >= 0.5);
    CHECK(a.edges[i].w <= 2.0);
  }
}
