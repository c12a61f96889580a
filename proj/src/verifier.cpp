#include "ndf/verifier.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <future>
#include <memory>
#include <thread>

#include "ndf/error.hpp"
#include "ndf/lattice.hpp"

namespace ndf {

void validate(const SuiteConfig& cfg) {
  if (cfg.n_samples < 1) throw Error(ErrorCode::BadSpec, "n_samples must be >= 1");
  if (!(cfg.inequality_tol > 0.0) || !(cfg.identity_tol > 0.0)) {
    throw Error(ErrorCode::BadSpec, "tolerances must be > 0");
  }
  if (cfg.identity_points < 1) {
    throw Error(ErrorCode::BadSpec, "identity_points must be >= 1");
  }
}

CheckResult run_check(const Check& check, std::size_t n, std::uint64_t seed) {
  Rng rng = Rng::stream(seed, check.name);
  CheckResult r;
  r.name = check.name;
  r.seed = seed;
  r.tolerance = check.tolerance;
  r.n_tested = n;
  for (std::size_t i = 0; i < n; ++i) {
    Witness w = check.sample(rng, i);
    const double v = check.violation(w);
    // NaN counts as the worst possible outcome.
    if (i == 0 || v > r.worst_violation || std::isnan(v)) {
      r.worst_violation = v;
      r.witness = std::move(w);
      if (std::isnan(v)) break;
    }
  }
  r.passed = r.worst_violation <= check.tolerance;
  return r;
}

std::vector<CheckResult> run_checks(const std::vector<Check>& checks,
                                    std::size_t n, std::uint64_t seed) {
  std::vector<CheckResult> out(checks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < checks.size(); i = next++) {
      out[i] = run_check(checks[i], n, seed);
    }
  };
  const std::size_t n_workers = std::clamp<std::size_t>(
      std::thread::hardware_concurrency(), 1, std::max<std::size_t>(checks.size(), 1));
  std::vector<std::future<void>> jobs;
  for (std::size_t w = 1; w < n_workers; ++w) {
    jobs.push_back(std::async(std::launch::async, worker));
  }
  worker();
  for (auto& j : jobs) j.get();
  return out;
}

namespace {

using FormRef = std::shared_ptr<const FormInstance>;

std::string qualified(const FormInstance& form, const std::string& check) {
  return form.name().empty() ? check : form.name() + "." + check;
}

Field field_at(const SpaceRef& space, const Witness& w, const std::string& key) {
  return {space, w.fields.at(key)};
}

std::vector<double> raw(const Field& f) { return {f.values().begin(), f.values().end()}; }

Field apply(const PLFunction& phi, const Field& f) {
  return f.map([&phi](double x) { return phi(x); });
}

/// Largest positive link of a chain a_0 <= a_1 <= ... given as (lhs, rhs) pairs.
double worst_link(std::initializer_list<std::pair<double, double>> links) {
  double w = -std::numeric_limits<double>::infinity();
  for (const auto& [lhs, rhs] : links) w = std::max(w, lhs - rhs);
  return w;
}

// --- samplers shared by several checks --------------------------------------

struct Sampler {
  SpaceRef space;
  FieldSamplerSpec spec;

  void fields(Witness& w, Rng& rng, std::initializer_list<const char*> keys) const {
    for (const char* k : keys) w.fields[k] = raw(sample_field(space, rng, spec));
  }
};

// --- criteria -----------------------------------------------------------------

Check pair_check(const FormRef& form, const SuiteConfig& cfg, const char* name,
                 bool with_alpha,
                 std::function<double(const FormInstance&, const Field&, const Field&, double)> gap) {
  Sampler s{form->space(), cfg.fields};
  return Check{
      qualified(*form, name), cfg.inequality_tol,
      [s, with_alpha](Rng& rng, std::size_t) {
        Witness w;
        s.fields(w, rng, {"f", "g"});
        if (with_alpha) w.scalars["alpha"] = sample_alpha(rng);
        return w;
      },
      [form, gap, with_alpha](const Witness& w) {
        const Field f = field_at(form->space(), w, "f");
        const Field g = field_at(form->space(), w, "g");
        const double alpha = with_alpha ? w.scalars.at("alpha") : 0.0;
        return gap(*form, f, g, alpha);
      }};
}

}  // namespace

std::vector<Check> criteria_checks(const FormInstance& form_in, const SuiteConfig& cfg) {
  const auto form = std::make_shared<const FormInstance>(form_in);
  std::vector<Check> out;
  out.push_back(pair_check(form, cfg, "minmax", false,
                           [](const FormInstance& E, const Field& f, const Field& g, double) {
                             return energy(E, sup(f, g)) + energy(E, inf(f, g)) -
                                    (energy(E, f) + energy(E, g));
                           }));
  out.push_back(pair_check(form, cfg, "hk", true,
                           [](const FormInstance& E, const Field& f, const Field& g, double a) {
                             const BandParam band(a);
                             return energy(E, h_alpha(f, g, band)) + energy(E, h_alpha(g, f, band)) -
                                    (energy(E, f) + energy(E, g));
                           }));
  out.push_back(pair_check(form, cfg, "prcr1", false,
                           [](const FormInstance& E, const Field& f, const Field& g, double) {
                             const auto [p1, p2] = project_order(f, g);
                             return energy(E, p1) + energy(E, p2) - (energy(E, f) + energy(E, g));
                           }));
  out.push_back(pair_check(form, cfg, "prcr2", true,
                           [](const FormInstance& E, const Field& f, const Field& g, double a) {
                             const auto [p1, p2] = project_band(f, g, BandParam(a));
                             return energy(E, p1) + energy(E, p2) - (energy(E, f) + energy(E, g));
                           }));

  Sampler s{form->space(), cfg.fields};
  out.push_back(Check{qualified(*form, "symmetry"), cfg.inequality_tol,
                      [s](Rng& rng, std::size_t) {
                        Witness w;
                        s.fields(w, rng, {"f"});
                        return w;
                      },
                      [form](const Witness& w) {
                        const Field f = field_at(form->space(), w, "f");
                        return std::abs(energy(*form, -f) - energy(*form, f));
                      }});
  return out;
}

Check normal_contraction_check(const FormInstance& form_in, const SuiteConfig& cfg) {
  const auto form = std::make_shared<const FormInstance>(form_in);
  Sampler s{form->space(), cfg.fields};
  const auto cspec = cfg.contractions;
  const bool force = cfg.force_negation;
  return Check{qualified(*form, "normal_contraction"), cfg.inequality_tol,
               [s, cspec, force](Rng& rng, std::size_t i) {
                 Witness w;
                 s.fields(w, rng, {"f"});
                 w.contraction = force && i == 0 ? PLFunction::negated_identity()
                                                 : sample_contraction(rng, cspec);
                 return w;
               },
               [form](const Witness& w) {
                 const Field f = field_at(form->space(), w, "f");
                 return energy(*form, apply(*w.contraction, f)) - energy(*form, f);
               }};
}

Check decomposition_chain_check(const FormInstance& form_in, const SuiteConfig& cfg) {
  const auto form = std::make_shared<const FormInstance>(form_in);
  Sampler s{form->space(), cfg.fields};
  const auto cspec = cfg.contractions;
  return Check{qualified(*form, "decomposition_chain"), cfg.inequality_tol,
               [s, cspec](Rng& rng, std::size_t) {
                 Witness w;
                 s.fields(w, rng, {"f"});
                 w.contraction = sample_alternating(rng, cspec);
                 return w;
               },
               [form](const Witness& w) {
                 const Field f = field_at(form->space(), w, "f");
                 const Decomposition d = decompose(*w.contraction);
                 double worst = -std::numeric_limits<double>::infinity();
                 Field g = f;
                 double e = energy(*form, g);
                 auto step = [&](const PLFunction& phi) {
                   g = apply(phi, g);
                   const double next = energy(*form, g);
                   worst = std::max(worst, next - e);
                   e = next;
                 };
                 for (auto it = d.factors.rbegin(); it != d.factors.rend(); ++it) step(*it);
                 step(d.residual);
                 const double direct = energy(*form, apply(*w.contraction, f));
                 return std::max(worst, std::abs(e - direct));
               }};
}

namespace {

/// 0 on (-inf, 0], then slope 1: y -> 0 v y.
PLFunction positive_part() { return {{0.0}, {0.0, 1.0}, 0.0}; }

struct ProofContext {
  FormRef form;
  double operator()(const Field& f) const { return energy(*form, f); }
};

// One kink at x >= 0.
struct OneCusp {
  double minmax4, hk5, conclusion;
};

OneCusp one_cusp(const ProofContext& E, const Field& f, double x) {
  const PLFunction phi = make_phi({x});
  const PLFunction sigma({0.0, x}, {0.0, 1.0, -1.0}, 0.0);
  const Field pf = apply(phi, f);
  const Field sf = apply(sigma, f);
  const Field pos = apply(positive_part(), f);
  const double e_f = E(f), e_pf = E(pf), e_sf = E(sf), e_nsf = E(-sf);
  const double e_pos = E(pos), e_npos = E(-pos);
  return {e_pf + e_pos - (e_f + e_sf),
          worst_link({{2.0 * e_sf, e_sf + e_nsf},
                      {e_sf + e_nsf, e_pos + e_npos},
                      {e_pos + e_npos, 2.0 * e_pos}}),
          e_pf - e_f};
}

struct OneSided {
  double hk4, hk3, psi_bound, minmax3, conclusion;
};

OneSided one_sided(const ProofContext& E, const Field& f, double x1, double x2) {
  const PLFunction phi = make_phi({x1, x2});
  const PLFunction sigma({x1, x2}, {0.0, -1.0, 1.0}, 0.0);
  const PLFunction psi({0.0, x1, x2}, {0.0, 1.0, -1.0, 1.0}, 0.0);
  const Field pf = apply(phi, f);
  const Field sf = apply(sigma, f);
  const Field qf = apply(psi, f);
  const Field pos = apply(positive_part(), f);
  const Field shifted = f.map([x1](double y) { return std::max(y - x1, 0.0); });
  const Field neg_shifted = f.map([x1](double y) { return std::min(x1 - y, 0.0); });
  const double e_f = E(f), e_pf = E(pf), e_sf = E(sf), e_nsf = E(-sf), e_qf = E(qf);
  const double e_pos = E(pos), e_sh = E(shifted), e_nsh = E(neg_shifted);
  return {e_qf + e_sh - (e_pos + e_sf),
          worst_link({{e_sh + e_nsh, 2.0 * e_sh},
                      {e_sf + e_nsf, e_sh + e_nsh},
                      {2.0 * e_sf, e_sf + e_nsf}}),
          e_qf - e_pos,
          e_pf + e_pos - (e_qf + e_f),
          e_pf - e_f};
}

struct TwoSided {
  double hk2, cusp_bound, conclusion;
};

/// Requires x1 < 0 < x2 and x2 > -x1.
TwoSided two_sided(const ProofContext& E, const Field& f, double x1, double x2) {
  const PLFunction phi = make_phi({x1, x2});
  const PLFunction psi({x1, x2}, {1.0, -1.0, 0.0}, 0.0);
  const Field pf = apply(phi, f);
  const Field qf = apply(psi, f);
  const Field capped = f.map([x2](double y) { return std::min(y, x2); });
  const double e_f = E(f), e_pf = E(pf), e_qf = E(qf), e_cap = E(capped);
  return {e_pf + e_cap - (e_f + e_qf), e_qf - e_cap, e_pf - e_f};
}

Check proof_check(const FormRef& form, const SuiteConfig& cfg, std::string name,
                  std::function<void(Witness&, Rng&)> params,
                  std::function<double(const ProofContext&, const Field&, const Witness&)> eval) {
  Sampler s{form->space(), cfg.fields};
  return Check{qualified(*form, name), cfg.inequality_tol,
               [s, params](Rng& rng, std::size_t) {
                 Witness w;
                 s.fields(w, rng, {"f"});
                 params(w, rng);
                 return w;
               },
               [form, eval](const Witness& w) {
                 return eval(ProofContext{form}, field_at(form->space(), w, "f"), w);
               }};
}

}  // namespace

std::vector<Check> proof_chain_checks(const FormInstance& form_in, const SuiteConfig& cfg) {
  const auto form = std::make_shared<const FormInstance>(form_in);
  const double reach = 0.75 * cfg.fields.amplitude;

  auto cusp_params = [reach](Witness& w, Rng& rng) {
    w.scalars["x"] = rng.bernoulli(0.1) ? 0.0 : rng.uniform(0.0, reach);
  };
  auto sided_params = [reach](Witness& w, Rng& rng) {
    const double x1 = rng.bernoulli(0.1) ? 0.0 : rng.uniform(0.0, reach);
    w.scalars["x1"] = x1;
    w.scalars["x2"] = x1 + rng.uniform(0.01, reach);
  };
  auto two_params = [reach](Witness& w, Rng& rng) {
    const double a = rng.uniform(0.01, reach);
    w.scalars["x1"] = -a;
    w.scalars["x2"] = a + rng.uniform(0.01, reach);
  };
  // x2 < -x1: the configuration obtained by reflecting through the origin.
  auto mirrored_params = [reach](Witness& w, Rng& rng) {
    const double a = rng.uniform(0.01, reach);
    w.scalars["x2"] = a;
    w.scalars["x1"] = -(a + rng.uniform(0.01, reach));
  };

  using Get = std::function<double(const ProofContext&, const Field&, const Witness&)>;
  auto cusp = [](double OneCusp::*m) -> Get {
    return [m](const ProofContext& E, const Field& f, const Witness& w) {
      return one_cusp(E, f, w.scalars.at("x")).*m;
    };
  };
  auto sided = [](double OneSided::*m) -> Get {
    return [m](const ProofContext& E, const Field& f, const Witness& w) {
      return one_sided(E, f, w.scalars.at("x1"), w.scalars.at("x2")).*m;
    };
  };
  auto two = [](double TwoSided::*m) -> Get {
    return [m](const ProofContext& E, const Field& f, const Witness& w) {
      return two_sided(E, f, w.scalars.at("x1"), w.scalars.at("x2")).*m;
    };
  };
  // phi_{x1,x2}(y) = -phi_{-x2,-x1}(-y), so the mirrored case runs the
  // stated construction on (-x2, -x1) and -f.
  auto mirrored = [](double TwoSided::*m) -> Get {
    return [m](const ProofContext& E, const Field& f, const Witness& w) {
      return two_sided(E, -f, -w.scalars.at("x2"), -w.scalars.at("x1")).*m;
    };
  };

  std::vector<Check> out;
  out.push_back(proof_check(form, cfg, "one_cusp.minmax4", cusp_params, cusp(&OneCusp::minmax4)));
  out.push_back(proof_check(form, cfg, "one_cusp.hk5", cusp_params, cusp(&OneCusp::hk5)));
  out.push_back(proof_check(form, cfg, "one_cusp.conclusion", cusp_params, cusp(&OneCusp::conclusion)));
  out.push_back(proof_check(form, cfg, "one_sided.hk4", sided_params, sided(&OneSided::hk4)));
  out.push_back(proof_check(form, cfg, "one_sided.hk3", sided_params, sided(&OneSided::hk3)));
  out.push_back(proof_check(form, cfg, "one_sided.psi_bound", sided_params, sided(&OneSided::psi_bound)));
  out.push_back(proof_check(form, cfg, "one_sided.minmax3", sided_params, sided(&OneSided::minmax3)));
  out.push_back(proof_check(form, cfg, "one_sided.conclusion", sided_params, sided(&OneSided::conclusion)));
  out.push_back(proof_check(form, cfg, "two_sided.hk2", two_params, two(&TwoSided::hk2)));
  out.push_back(proof_check(form, cfg, "two_sided.cusp_bound", two_params, two(&TwoSided::cusp_bound)));
  out.push_back(proof_check(form, cfg, "two_sided.conclusion", two_params, two(&TwoSided::conclusion)));
  out.push_back(proof_check(form, cfg, "two_sided_mirrored.hk2", mirrored_params, mirrored(&TwoSided::hk2)));
  out.push_back(proof_check(form, cfg, "two_sided_mirrored.cusp_bound", mirrored_params, mirrored(&TwoSided::cusp_bound)));
  out.push_back(proof_check(form, cfg, "two_sided_mirrored.conclusion", mirrored_params,
                            [](const ProofContext& E, const Field& f, const Witness& w) {
                              const PLFunction phi = make_phi({w.scalars.at("x1"), w.scalars.at("x2")});
                              return E(apply(phi, f)) - E(f);
                            }));
  return out;
}

std::vector<Check> identity_checks(const SuiteConfig& cfg) {
  const SpaceRef space = make_space(std::vector<double>(cfg.identity_points, 1.0));
  Sampler s{space, cfg.fields};
  const double tol = cfg.identity_tol;

  auto pair_alpha = [s](Rng& rng, std::size_t) {
    Witness w;
    s.fields(w, rng, {"f", "g"});
    if (rng.bernoulli(0.05)) w.fields["g"] = w.fields["f"];
    w.scalars["alpha"] = sample_alpha(rng);
    return w;
  };
  auto pair_only = [pair_alpha](Rng& rng, std::size_t i) {
    Witness w = pair_alpha(rng, i);
    w.scalars.erase("alpha");
    return w;
  };
  auto get = [space](const Witness& w, const char* k) { return field_at(space, w, k); };

  std::vector<Check> out;
  out.push_back(Check{"identities.remark_identity", tol, pair_alpha, [get](const Witness& w) {
                        const Field f = get(w, "f");
                        const Field g = get(w, "g");
                        const BandParam a(w.scalars.at("alpha"));
                        const Field rhs = 0.5 * project_band(f, g, a).first +
                                          0.5 * project_band(g, f, a).second;
                        return linf_norm(h_alpha(f, g, a) - rhs);
                      }});

  auto twist_sampler = [pair_alpha](bool restrict_sum) {
    return [pair_alpha, restrict_sum](Rng& rng, std::size_t i) {
      Witness w = pair_alpha(rng, i);
      double t = rng.uniform(0.0, 1.0);
      double s2 = rng.uniform(0.0, 1.0);
      if (restrict_sum && t + s2 > 1.0) {
        t = 1.0 - t;
        s2 = 1.0 - s2;
      }
      w.scalars["t"] = t;
      w.scalars["s"] = s2;
      return w;
    };
  };
  auto twist_violation = [get](const Witness& w) {
    const auto r = twist_check(get(w, "f"), get(w, "g"), BandParam(w.scalars.at("alpha")),
                               w.scalars.at("t"), w.scalars.at("s"));
    return std::max(r.h, r.k);
  };
  out.push_back(Check{"identities.twist_condition", tol, twist_sampler(false), twist_violation});
  out.push_back(Check{"identities.twist_condition_t_plus_s_le_1", tol, twist_sampler(true),
                      twist_violation});

  out.push_back(Check{"identities.midpoint_law", tol, pair_alpha, [get](const Witness& w) {
                        const Field u = get(w, "f");
                        const Field v = get(w, "g");
                        const BandParam a(w.scalars.at("alpha"));
                        const Field u_half = 0.5 * u + 0.5 * h_alpha(u, v, a);
                        const Field v_half = 0.5 * v + 0.5 * h_alpha(v, u, a);
                        const auto [p1, p2] = project_band(u, v, a);
                        return std::max(linf_norm(u_half - p1), linf_norm(v_half - p2));
                      }});
  out.push_back(Check{"identities.order_projection_oracle", tol, pair_only,
                      [get](const Witness& w) {
                        const Field f = get(w, "f");
                        const Field g = get(w, "g");
                        const auto [a1, a2] = project_order(f, g);
                        const auto [b1, b2] = project_oracle(OrderSet{}, f, g);
                        return std::max(linf_norm(a1 - b1), linf_norm(a2 - b2));
                      }});
  out.push_back(Check{"identities.band_projection_oracle", tol, pair_alpha,
                      [get](const Witness& w) {
                        const Field f = get(w, "f");
                        const Field g = get(w, "g");
                        const BandParam a(w.scalars.at("alpha"));
                        const auto [a1, a2] = project_band(f, g, a);
                        const auto [b1, b2] = project_oracle(BandSet{a}, f, g);
                        return std::max(linf_norm(a1 - b1), linf_norm(a2 - b2));
                      }});
  return out;
}

std::vector<CheckResult> check_criteria(const FormInstance& form, const SuiteConfig& cfg) {
  validate(cfg);
  return run_checks(criteria_checks(form, cfg), cfg.n_samples, cfg.seed);
}

CheckResult check_normal_contraction(const FormInstance& form, const SuiteConfig& cfg) {
  validate(cfg);
  return run_check(normal_contraction_check(form, cfg), cfg.n_samples, cfg.seed);
}

CheckResult check_decomposition_chain(const FormInstance& form, const SuiteConfig& cfg) {
  validate(cfg);
  return run_check(decomposition_chain_check(form, cfg), cfg.n_samples, cfg.seed);
}

namespace {

bool all_passed(const std::vector<CheckResult>& rs) {
  return std::all_of(rs.begin(), rs.end(), [](const CheckResult& r) { return r.passed; });
}

}  // namespace

std::vector<CheckResult> run_proof_chain(const FormInstance& form, const SuiteConfig& cfg) {
  if (!all_passed(check_criteria(form, cfg))) {
    throw Error(ErrorCode::PreconditionFailed,
                "form '" + form.name() + "' fails the Dirichlet criteria or symmetry");
  }
  return run_checks(proof_chain_checks(form, cfg), cfg.n_samples, cfg.seed);
}

std::vector<CheckResult> check_identities(const SuiteConfig& cfg) {
  validate(cfg);
  return run_checks(identity_checks(cfg), cfg.n_samples, cfg.seed);
}

FormInstance counterexample_form() {
  return make_form(FormDescriptor{"counterexample", 11, std::nullopt,
                                  LocalGrid1D{0.1, MaxPositivePart{}}});
}

CheckResult counterexample_demo() {
  const FormInstance form = counterexample_form();
  std::vector<double> ramp(11);
  for (std::size_t i = 0; i < ramp.size(); ++i) ramp[i] = 0.0 - static_cast<double>(i) / 10.0;
  const Field f(form.space(), ramp);
  const double e_f = energy(form, f);
  const double e_neg = energy(form, -f);

  CheckResult r;
  r.name = "counterexample.normal_contraction";
  r.worst_violation = e_neg - e_f;
  r.passed = false;
  r.n_tested = 1;
  r.tolerance = 1e-9;
  r.witness.fields["f"] = ramp;
  r.witness.contraction = PLFunction::negated_identity();
  r.witness.scalars["energy_f"] = e_f;
  r.witness.scalars["energy_neg_f"] = e_neg;
  return r;
}

std::vector<CheckResult> run_suite(const std::vector<FormInstance>& forms,
                                   const SuiteConfig& cfg) {
  validate(cfg);
  std::vector<Check> first;
  for (const auto& form : forms) {
    auto c = criteria_checks(form, cfg);
    first.insert(first.end(), c.begin(), c.end());
    first.push_back(normal_contraction_check(form, cfg));
  }
  std::vector<CheckResult> results = run_checks(first, cfg.n_samples, cfg.seed);

  std::vector<Check> second;
  constexpr std::size_t kPerForm = 6;
  for (std::size_t i = 0; i < forms.size(); ++i) {
    const auto begin = results.begin() + static_cast<std::ptrdiff_t>(i * kPerForm);
    const std::vector<CheckResult> criteria(begin, begin + 5);
    if (!all_passed(criteria)) continue;
    second.push_back(decomposition_chain_check(forms[i], cfg));
    auto p = proof_chain_checks(forms[i], cfg);
    second.insert(second.end(), p.begin(), p.end());
  }
  if (cfg.run_identities) {
    auto ids = identity_checks(cfg);
    second.insert(second.end(), ids.begin(), ids.end());
  }
  auto more = run_checks(second, cfg.n_samples, cfg.seed);
  results.insert(results.end(), more.begin(), more.end());
  return results;
}

}  // namespace ndf
