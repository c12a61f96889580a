#include "ndf/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "ndf/error.hpp"

namespace ndf {

BandParam::BandParam(double alpha) : alpha_(alpha) {
  if (!std::isfinite(alpha) || alpha < 0.0) {
    throw Error(ErrorCode::BadSpec, "band parameter must be finite and >= 0");
  }
}

namespace {

template <class Op>
Field pointwise(const Field& f, const Field& g, Op op) {
  require_same_space(f, g);
  std::vector<double> out(f.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = op(f[i], g[i]);
  return {f.space(), std::move(out)};
}

template <class Op>
FieldPair pointwise_pair(const Field& f, const Field& g, Op op) {
  require_same_space(f, g);
  std::vector<double> a(f.size());
  std::vector<double> b(f.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    std::tie(a[i], b[i]) = op(f[i], g[i]);
  }
  return {Field(f.space(), std::move(a)), Field(f.space(), std::move(b))};
}

double clamp_to_band(double f, double g, double alpha) {
  const double d = f - g;
  if (d < -alpha) return g - alpha;
  if (d > alpha) return g + alpha;
  return f;
}

}  // namespace

Field sup(const Field& f, const Field& g) {
  return pointwise(f, g, [](double a, double b) { return std::max(a, b); });
}

Field inf(const Field& f, const Field& g) {
  return pointwise(f, g, [](double a, double b) { return std::min(a, b); });
}

Field h_alpha(const Field& f, const Field& g, BandParam alpha) {
  const double a = alpha.alpha();
  return pointwise(f, g, [a](double x, double y) { return clamp_to_band(x, y, a); });
}

double phi_alpha(double z, double alpha) {
  return std::max(z + alpha, 0.0) + std::min(z - alpha, 0.0);
}

FieldPair project_order(const Field& f, const Field& g) {
  return pointwise_pair(f, g, [](double a, double b) {
    const double d = 0.5 * std::max(a - b, 0.0);
    return std::pair{a - d, b + d};
  });
}

FieldPair project_band(const Field& f, const Field& g, BandParam alpha) {
  const double al = alpha.alpha();
  return pointwise_pair(f, g, [al](double a, double b) {
    const double half = 0.5 * phi_alpha(a - b, al);
    return std::pair{b + half, a - half};
  });
}

FieldPair project_oracle(const ConstraintSet& set, const Field& f,
                         const Field& g) {
  if (std::holds_alternative<OrderSet>(set)) {
    return pointwise_pair(f, g, [](double a, double b) {
      if (a <= b) return std::pair{a, b};
      const double mid = 0.5 * (a + b);
      return std::pair{mid, mid};
    });
  }
  const double al = std::get<BandSet>(set).band.alpha();
  return pointwise_pair(f, g, [al](double a, double b) {
    const double d = a - b;
    if (std::abs(d) <= al) return std::pair{a, b};
    // Keep the midpoint, shorten the difference to exactly +-alpha.
    const double mid = 0.5 * (a + b);
    const double half = d > 0.0 ? 0.5 * al : -0.5 * al;
    return std::pair{mid + half, mid - half};
  });
}

TwistResiduals twist_check(const Field& u, const Field& v, BandParam alpha,
                           double t, double s) {
  require_same_space(u, v);
  const Field hu = h_alpha(u, v, alpha);
  const Field kv = h_alpha(v, u, alpha);
  auto u_at = [&](double r) { return (1.0 - r) * u + r * hu; };
  auto v_at = [&](double r) { return (1.0 - r) * v + r * kv; };
  const Field ut = u_at(t);
  const Field vs = v_at(s);
  return {linf_norm(h_alpha(ut, vs, alpha) - u_at(1.0 - s)),
          linf_norm(h_alpha(vs, ut, alpha) - v_at(1.0 - t))};
}

}  // namespace ndf
