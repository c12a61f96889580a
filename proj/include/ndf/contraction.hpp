#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace ndf {

/// Continuous piecewise-linear function on the real line with slopes in
/// [-1, 1].
///
/// Stored canonically: strictly increasing breakpoints, one slope per
/// interval (breakpoints.size() + 1 of them, adjacent slopes distinct) and
/// the value at 0. Two PLFunctions describing the same map therefore have
/// identical members up to floating-point rounding of the breakpoints.
class PLFunction {
 public:
  /// Builds and canonicalizes. Breakpoints must be non-decreasing; pieces of
  /// zero length between repeated breakpoints are dropped, and equal-slope
  /// neighbours are merged. Throws NotIncreasing on a decreasing pair and
  /// BadSpec on a wrong slope count or a slope outside [-1, 1].
  PLFunction(std::vector<double> breakpoints, std::vector<double> slopes,
             double anchor_value);

  static PLFunction identity() { return {{}, {1.0}, 0.0}; }
  static PLFunction negated_identity() { return {{}, {-1.0}, 0.0}; }

  [[nodiscard]] std::span<const double> breakpoints() const noexcept {
    return breakpoints_;
  }
  [[nodiscard]] std::span<const double> slopes() const noexcept {
    return slopes_;
  }
  [[nodiscard]] double anchor_value() const noexcept { return anchor_; }

  [[nodiscard]] double operator()(double x) const;

  /// Slope of the piece containing x; at a breakpoint, the piece to its right.
  [[nodiscard]] double slope_at(double x) const;

  /// Structural comparison with an absolute tolerance on every member.
  [[nodiscard]] bool approx_equal(const PLFunction& other,
                                  double tol = 1e-12) const;

 private:
  [[nodiscard]] std::size_t piece_of(double x) const;

  std::vector<double> breakpoints_;
  std::vector<double> slopes_;
  double anchor_;
  std::size_t zero_piece_ = 0;
  std::vector<double> knot_values_;
};

struct ContractionClass {
  enum class Kind { F, G, GeneralNormal, NotNormal };
  Kind kind;
  std::size_t k = 0;  ///< breakpoint count; meaningful for Kind::F only

  static ContractionClass F(std::size_t k) { return {Kind::F, k}; }
  static ContractionClass G() { return {Kind::G, 0}; }
  static ContractionClass general_normal() { return {Kind::GeneralNormal, 0}; }
  static ContractionClass not_normal() { return {Kind::NotNormal, 0}; }

  friend bool operator==(const ContractionClass&,
                         const ContractionClass&) = default;
};

std::string to_string(const ContractionClass& c);

/// The alternating contraction with the given kinks: slope (-1)^i on the
/// i-th interval, starting at +1 on the leftmost one, and value 0 at 0.
/// Throws NotIncreasing unless the breakpoints are strictly increasing.
PLFunction make_phi(std::vector<double> breakpoints);

inline double eval(const PLFunction& phi, double x) { return phi(x); }

/// outer after inner.
PLFunction compose(const PLFunction& outer, const PLFunction& inner);

/// Factorization of an alternating contraction into two-kink pieces.
///
/// `factors` holds floor(k/2) members of F_2 and `residual` lies in F_0 or
/// F_1. The original map is recovered as
///
///     residual o factors[0] o factors[1] o ... o factors.back()
///
/// so factors.back() acts first. This is the order produced by repeatedly
/// peeling off the narrowest pair of kinks: each peeled pair becomes the
/// innermost map of what remains.
struct Decomposition {
  std::vector<PLFunction> factors;
  PLFunction residual = PLFunction::identity();
};

/// Throws NotAlternating if phi does not classify as some F(k).
Decomposition decompose(const PLFunction& phi);

/// Composes a Decomposition back into a single function.
PLFunction recompose(const Decomposition& d);

struct EnvelopeSample {
  double y;
  double value;
};

/// x -> min_j value_j + |x - y_j| on [-radius, radius], continued with slope
/// -1 to the left and +1 to the right. Requires distinct sample locations,
/// pairwise 1-Lipschitz data and a sample (0, 0); otherwise throws
/// InconsistentSamples. Throws BadSpec if radius is not positive.
PLFunction envelope(std::span<const EnvelopeSample> samples, double radius);

bool is_normal_contraction(const PLFunction& phi);

ContractionClass classify(const PLFunction& phi);

}  // namespace ndf
