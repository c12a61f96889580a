#pragma once

#include <utility>
#include <variant>

#include "ndf/measure.hpp"

namespace ndf {

/// Band half-width alpha >= 0.
class BandParam {
 public:
  /// Throws BadSpec on a negative or non-finite value.
  explicit BandParam(double alpha);
  [[nodiscard]] double alpha() const noexcept { return alpha_; }

 private:
  double alpha_;
};

/// {(f, g) : f <= g}
struct OrderSet {};
/// {(f, g) : |f - g| <= alpha}
struct BandSet {
  BandParam band;
};
using ConstraintSet = std::variant<OrderSet, BandSet>;

using FieldPair = std::pair<Field, Field>;

Field sup(const Field& f, const Field& g);
Field inf(const Field& f, const Field& g);

/// Clamp of f into [g - alpha, g + alpha]. Returns g when alpha = 0.
Field h_alpha(const Field& f, const Field& g, BandParam alpha);

/// ((z + alpha) v 0) + ((z - alpha) ^ 0)
double phi_alpha(double z, double alpha);

/// Closed-form projection onto the order set:
/// (f - d/2, g + d/2) with d = (f - g) v 0.
FieldPair project_order(const Field& f, const Field& g);

/// Closed-form projection onto the band set:
/// (g + phi_alpha(f - g)/2, f - phi_alpha(f - g)/2).
FieldPair project_band(const Field& f, const Field& g, BandParam alpha);

/// Projection computed pointwise from planar geometry alone (no use of the
/// closed forms above): reflect-to-diagonal for the order set, symmetric
/// shrink of the difference for the band.
FieldPair project_oracle(const ConstraintSet& set, const Field& f,
                         const Field& g);

struct TwistResiduals {
  double h;
  double k;
};

/// With u_t = (1-t)u + t H(u,v) and v_s = (1-s)v + s H(v,u), returns
/// ||H(u_t, v_s) - u_{1-s}||_inf and ||H(v_s, u_t) - v_{1-t}||_inf.
TwistResiduals twist_check(const Field& u, const Field& v, BandParam alpha,
                           double t, double s);

}  // namespace ndf
