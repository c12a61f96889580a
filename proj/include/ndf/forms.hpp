#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ndf/measure.hpp"

namespace ndf {

/// Value in [0, +inf].
class ExtendedEnergy {
 public:
  constexpr ExtendedEnergy() = default;
  constexpr explicit ExtendedEnergy(double v) : value_(v) {}
  static constexpr ExtendedEnergy infinite() {
    return ExtendedEnergy(std::numeric_limits<double>::infinity());
  }

  [[nodiscard]] constexpr double value() const noexcept { return value_; }
  [[nodiscard]] bool is_finite() const noexcept {
    return value_ != std::numeric_limits<double>::infinity();
  }

  friend ExtendedEnergy operator+(ExtendedEnergy a, ExtendedEnergy b) {
    return ExtendedEnergy(a.value_ + b.value_);
  }
  friend auto operator<=>(ExtendedEnergy, ExtendedEnergy) = default;

 private:
  double value_ = 0.0;
};

// ---------------------------------------------------------------------------
// Scalar kernels. Every form in the catalog is a sum of edge terms
// coeff * g((u[head] - u[tail]) / scale) with g one of these.

/// g(y) = |y|^p / p, p >= 1
struct PowerKernel {
  double p;
};
/// g(y) = max(y, 0)
struct PositivePartKernel {};
using Kernel = std::variant<PowerKernel, PositivePartKernel>;

struct EdgeTerm {
  std::size_t head;
  std::size_t tail;
  double coeff;
  double scale;
  Kernel kernel;

  [[nodiscard]] double value(double z) const;
  [[nodiscard]] double derivative(double z) const;
  [[nodiscard]] double curvature(double z) const;
  /// Convex conjugate; +inf outside its domain.
  [[nodiscard]] double conjugate(double q) const;
  /// argmin_q lambda F*(q) + (q - y)^2 / 2
  [[nodiscard]] double prox_conjugate(double y, double lambda) const;
  /// Twice differentiable everywhere (power kernels with p >= 2).
  [[nodiscard]] bool smooth() const;
};

// ---------------------------------------------------------------------------
// Descriptors

struct GraphEdge {
  std::size_t a;
  std::size_t b;
  double w;
};

/// E(u) = sum over unordered edges of w/2 (u_a - u_b)^2
struct GraphQuadratic {
  std::vector<GraphEdge> edges;
};

enum class PsiKind { Square, Quartic, Abs, Power };

/// psi(z) = z^2, z^4, |z| or |z|^p.
struct Psi {
  PsiKind kind = PsiKind::Square;
  double p = 2.0;  ///< used by PsiKind::Power only
};

/// E(u) = sum over ordered pairs x != y of w(x,y) psi(u(x) - u(y)).
/// An empty kernel means w = 1 on every ordered pair.
struct NonlocalPsi {
  std::vector<std::vector<double>> kernel;
  Psi psi;
};

/// f(x, v) = |v|^p / p
struct AbsPower {
  double p;
};
/// f(x, v) = max(v, 0); not even, so the resulting form is not symmetric.
struct MaxPositivePart {};
/// f(x_i, v) = a_i |v|, one weight per grid edge.
struct FinslerWeighted {
  std::vector<double> a;
};
using Integrand = std::variant<AbsPower, MaxPositivePart, FinslerWeighted>;

/// E(u) = sum_i h f(x_i, (u_{i+1} - u_i) / h) over the interior edges of a
/// uniform grid; node masses default to h.
struct LocalGrid1D {
  double h;
  Integrand integrand;
};

using FormKind = std::variant<GraphQuadratic, NonlocalPsi, LocalGrid1D>;

struct FormDescriptor {
  std::string name;
  std::size_t nodes = 0;
  std::optional<std::vector<double>> weights;  ///< node masses
  FormKind kind;
};

/// Validated, immutable energy functional on a finite measure space.
class FormInstance {
 public:
  [[nodiscard]] const FormDescriptor& descriptor() const noexcept { return desc_; }
  [[nodiscard]] const SpaceRef& space() const noexcept { return space_; }
  [[nodiscard]] const std::vector<EdgeTerm>& terms() const noexcept { return terms_; }
  [[nodiscard]] const std::string& name() const noexcept { return desc_.name; }

  /// All terms have a twice-differentiable kernel.
  [[nodiscard]] bool smooth() const;

  /// True for catalog entries whose energy is even by construction.
  [[nodiscard]] bool symmetric_by_construction() const;

 private:
  friend FormInstance make_form(FormDescriptor desc);
  FormInstance() = default;

  FormDescriptor desc_;
  SpaceRef space_;
  std::vector<EdgeTerm> terms_;
};

/// Throws BadSpec naming the violated invariant.
FormInstance make_form(FormDescriptor desc);

ExtendedEnergy eval_form(const FormInstance& form, const Field& u);

/// Convenience: eval_form(form, u).value().
double energy(const FormInstance& form, const Field& u);

struct SymmetryReport {
  bool symmetric;
  double worst_asymmetry;
  std::vector<double> witness;
};

/// Samples n fields and reports max |E(-f) - E(f)|; symmetric iff <= 1e-9.
SymmetryReport is_symmetric_sampled(const FormInstance& form, std::size_t n,
                                    std::uint64_t seed);

/// Connected random graph: a path through all nodes plus each remaining pair
/// with probability edge_prob; weights uniform in [0.5, 2].
GraphQuadratic random_graph(std::size_t nodes, double edge_prob,
                            std::uint64_t seed);

}  // namespace ndf
