#include "ndf/forms.hpp"

#include <algorithm>
#include <cmath>

#include "ndf/error.hpp"
#include "ndf/sampling.hpp"

namespace ndf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kDomainSlack = 1e-12;

double sign(double y) { return y > 0.0 ? 1.0 : (y < 0.0 ? -1.0 : 0.0); }

/// Solves r + mu r^(p-1) = a on [0, a] for a >= 0, p > 1.
double power_prox_radius(double a, double mu, double p) {
  if (a == 0.0) return 0.0;
  double lo = 0.0;
  double hi = a;
  double r = a / (1.0 + mu);
  for (int it = 0; it < 200; ++it) {
    const double val = r + mu * std::pow(r, p - 1.0) - a;
    if (val > 0.0) {
      hi = r;
    } else {
      lo = r;
    }
    const double slope = 1.0 + mu * (p - 1.0) * std::pow(r, p - 2.0);
    double next = r - val / slope;
    if (!(next > lo && next < hi) || !std::isfinite(next)) next = 0.5 * (lo + hi);
    if (std::abs(next - r) <= 1e-16 * a) return next;
    r = next;
  }
  return r;
}

/// argmin_x mu g(x) + (x - y)^2 / 2
double kernel_prox(const Kernel& k, double y, double mu) {
  if (const auto* pk = std::get_if<PowerKernel>(&k)) {
    if (pk->p == 1.0) return sign(y) * std::max(std::abs(y) - mu, 0.0);
    if (pk->p == 2.0) return y / (1.0 + mu);
    return sign(y) * power_prox_radius(std::abs(y), mu, pk->p);
  }
  if (y > mu) return y - mu;
  if (y >= 0.0) return 0.0;
  return y;
}

}  // namespace

double EdgeTerm::value(double z) const {
  const double y = z / scale;
  if (const auto* pk = std::get_if<PowerKernel>(&kernel)) {
    const double ay = std::abs(y);
    if (pk->p == 1.0) return coeff * ay;
    if (pk->p == 2.0) return coeff * 0.5 * ay * ay;
    if (pk->p == 4.0) return coeff * 0.25 * (ay * ay) * (ay * ay);
    return coeff * std::pow(ay, pk->p) / pk->p;
  }
  return coeff * std::max(y, 0.0);
}

double EdgeTerm::derivative(double z) const {
  const double y = z / scale;
  if (const auto* pk = std::get_if<PowerKernel>(&kernel)) {
    if (pk->p == 2.0) return coeff / scale * y;
    return coeff / scale * sign(y) * std::pow(std::abs(y), pk->p - 1.0);
  }
  return y > 0.0 ? coeff / scale : 0.0;
}

double EdgeTerm::curvature(double z) const {
  const double y = z / scale;
  if (const auto* pk = std::get_if<PowerKernel>(&kernel)) {
    if (pk->p == 2.0) return coeff / (scale * scale);
    if (pk->p < 2.0) return y == 0.0 ? kInf : coeff / (scale * scale) * (pk->p - 1.0) * std::pow(std::abs(y), pk->p - 2.0);
    return coeff / (scale * scale) * (pk->p - 1.0) * std::pow(std::abs(y), pk->p - 2.0);
  }
  return 0.0;
}

double EdgeTerm::conjugate(double q) const {
  const double r = q * scale / coeff;
  if (const auto* pk = std::get_if<PowerKernel>(&kernel)) {
    if (pk->p == 1.0) return std::abs(r) <= 1.0 + kDomainSlack ? 0.0 : kInf;
    const double dual_p = pk->p / (pk->p - 1.0);
    if (pk->p == 2.0) return coeff * 0.5 * r * r;
    return coeff * std::pow(std::abs(r), dual_p) / dual_p;
  }
  return (r >= -kDomainSlack && r <= 1.0 + kDomainSlack) ? 0.0 : kInf;
}

double EdgeTerm::prox_conjugate(double y, double lambda) const {
  const double bound = coeff / scale;
  if (const auto* pk = std::get_if<PowerKernel>(&kernel)) {
    if (pk->p == 1.0) return std::clamp(y, -bound, bound);
  } else {
    return std::clamp(y, 0.0, bound);
  }
  // Moreau: prox_{lambda F*}(y) = y - lambda prox_{F/lambda}(y/lambda), and
  // prox_{mu F}(x) = scale * prox_{mu coeff/scale^2 g}(x/scale).
  const double mu = coeff / (lambda * scale * scale);
  const double x = y / lambda;
  return y - lambda * scale * kernel_prox(kernel, x / scale, mu);
}

bool EdgeTerm::smooth() const {
  const auto* pk = std::get_if<PowerKernel>(&kernel);
  return pk != nullptr && pk->p >= 2.0;
}

bool FormInstance::smooth() const {
  return std::all_of(terms_.begin(), terms_.end(),
                     [](const EdgeTerm& t) { return t.smooth(); });
}

bool FormInstance::symmetric_by_construction() const {
  if (const auto* lg = std::get_if<LocalGrid1D>(&desc_.kind)) {
    return !std::holds_alternative<MaxPositivePart>(lg->integrand);
  }
  return true;
}

namespace {

[[noreturn]] void bad(const std::string& what) {
  throw Error(ErrorCode::BadSpec, what);
}

bool finite_nonneg(double w) { return std::isfinite(w) && w >= 0.0; }

void add_graph_terms(const GraphQuadratic& g, std::size_t n,
                     std::vector<EdgeTerm>& terms) {
  for (const auto& e : g.edges) {
    if (e.a >= n || e.b >= n) bad("graph edge endpoint out of range");
    if (!finite_nonneg(e.w)) bad("graph edge weight must be finite and >= 0");
    if (e.w == 0.0 || e.a == e.b) continue;
    terms.push_back({e.a, e.b, e.w, 1.0, PowerKernel{2.0}});
  }
}

void add_nonlocal_terms(const NonlocalPsi& nl, std::size_t n,
                        std::vector<EdgeTerm>& terms) {
  if (!nl.kernel.empty()) {
    if (nl.kernel.size() != n) bad("nonlocal kernel must be nodes x nodes");
    for (const auto& row : nl.kernel) {
      if (row.size() != n) bad("nonlocal kernel must be nodes x nodes");
      for (double w : row) {
        if (!finite_nonneg(w)) bad("nonlocal kernel entries must be finite and >= 0");
      }
    }
  }
  double mult = 1.0;
  Kernel kernel = PowerKernel{2.0};
  switch (nl.psi.kind) {
    case PsiKind::Square: mult = 2.0; kernel = PowerKernel{2.0}; break;
    case PsiKind::Quartic: mult = 4.0; kernel = PowerKernel{4.0}; break;
    case PsiKind::Abs: mult = 1.0; kernel = PowerKernel{1.0}; break;
    case PsiKind::Power:
      if (!(nl.psi.p >= 1.0) || !std::isfinite(nl.psi.p)) bad("psi power must be >= 1");
      mult = nl.psi.p;
      kernel = PowerKernel{nl.psi.p};
      break;
  }
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y = 0; y < n; ++y) {
      if (x == y) continue;
      const double w = nl.kernel.empty() ? 1.0 : nl.kernel[x][y];
      if (w == 0.0) continue;
      terms.push_back({x, y, mult * w, 1.0, kernel});
    }
  }
}

void add_local_terms(const LocalGrid1D& lg, std::size_t n,
                     std::vector<EdgeTerm>& terms) {
  if (!(lg.h > 0.0) || !std::isfinite(lg.h)) bad("local grid spacing h must be > 0");
  const double h = lg.h;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    std::visit(
        [&](const auto& f) {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, AbsPower>) {
            if (!(f.p >= 1.0) || !std::isfinite(f.p)) bad("AbsPower needs p >= 1");
            terms.push_back({i + 1, i, h, h, PowerKernel{f.p}});
          } else if constexpr (std::is_same_v<T, MaxPositivePart>) {
            terms.push_back({i + 1, i, h, h, PositivePartKernel{}});
          } else {
            if (f.a.size() != n - 1) bad("FinslerWeighted needs one weight per grid edge");
            if (!(f.a[i] > 0.0) || !std::isfinite(f.a[i])) bad("Finsler weights must be > 0");
            terms.push_back({i + 1, i, f.a[i] * h, h, PowerKernel{1.0}});
          }
        },
        lg.integrand);
  }
}

}  // namespace

FormInstance make_form(FormDescriptor desc) {
  if (desc.nodes == 0) bad("form needs at least one node");
  std::vector<double> weights;
  if (desc.weights) {
    if (desc.weights->size() != desc.nodes) bad("weights must have one entry per node");
    weights = *desc.weights;
  } else if (const auto* lg = std::get_if<LocalGrid1D>(&desc.kind)) {
    if (!(lg->h > 0.0) || !std::isfinite(lg->h)) bad("local grid spacing h must be > 0");
    weights.assign(desc.nodes, lg->h);
  } else {
    weights.assign(desc.nodes, 1.0);
  }

  FormInstance form;
  try {
    form.space_ = make_space(std::move(weights));
  } catch (const Error& e) {
    bad(std::string("invalid node weights: ") + e.what());
  }
  const std::size_t n = desc.nodes;
  std::visit(
      [&](const auto& kind) {
        using T = std::decay_t<decltype(kind)>;
        if constexpr (std::is_same_v<T, GraphQuadratic>) {
          add_graph_terms(kind, n, form.terms_);
        } else if constexpr (std::is_same_v<T, NonlocalPsi>) {
          add_nonlocal_terms(kind, n, form.terms_);
        } else {
          add_local_terms(kind, n, form.terms_);
        }
      },
      desc.kind);
  form.desc_ = std::move(desc);
  return form;
}

ExtendedEnergy eval_form(const FormInstance& form, const Field& u) {
  if (!u.space()->same_as(*form.space())) {
    throw Error(ErrorCode::SpaceMismatch, "field is not on the form's space");
  }
  double total = 0.0;
  for (const auto& t : form.terms()) total += t.value(u[t.head] - u[t.tail]);
  return ExtendedEnergy(total);
}

double energy(const FormInstance& form, const Field& u) {
  return eval_form(form, u).value();
}

SymmetryReport is_symmetric_sampled(const FormInstance& form, std::size_t n,
                                    std::uint64_t seed) {
  Rng rng = Rng::stream(seed, "symmetry");
  SymmetryReport out{true, 0.0, {}};
  for (std::size_t i = 0; i < std::max<std::size_t>(n, 1); ++i) {
    const Field f = sample_field(form.space(), rng, FieldSamplerSpec{});
    const double gap = std::abs(energy(form, -f) - energy(form, f));
    if (out.witness.empty() || gap > out.worst_asymmetry) {
      out.worst_asymmetry = gap;
      out.witness.assign(f.values().begin(), f.values().end());
    }
  }
  out.symmetric = out.worst_asymmetry <= 1e-9;
  return out;
}

GraphQuadratic random_graph(std::size_t nodes, double edge_prob,
                            std::uint64_t seed) {
  Rng rng = Rng::stream(seed, "random_graph");
  GraphQuadratic g;
  for (std::size_t i = 0; i + 1 < nodes; ++i) {
    g.edges.push_back({i, i + 1, rng.uniform(0.5, 2.0)});
  }
  for (std::size_t i = 0; i < nodes; ++i) {
    for (std::size_t j = i + 2; j < nodes; ++j) {
      if (rng.bernoulli(edge_prob)) g.edges.push_back({i, j, rng.uniform(0.5, 2.0)});
    }
  }
  return g;
}

}  // namespace ndf
