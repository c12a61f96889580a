#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace ndf {

/// Finite weighted point set {0, ..., n-1} with strictly positive masses.
class MeasureSpace {
 public:
  [[nodiscard]] std::size_t size() const noexcept { return weights_.size(); }
  [[nodiscard]] double weight(std::size_t x) const { return weights_.at(x); }
  [[nodiscard]] std::span<const double> weights() const noexcept {
    return weights_;
  }

  /// Two spaces are interchangeable when their weight vectors agree exactly.
  [[nodiscard]] bool same_as(const MeasureSpace& other) const noexcept;

 private:
  friend std::shared_ptr<const MeasureSpace> make_space(
      std::vector<double> weights);
  explicit MeasureSpace(std::vector<double> weights)
      : weights_(std::move(weights)) {}

  std::vector<double> weights_;
};

using SpaceRef = std::shared_ptr<const MeasureSpace>;

/// Throws EmptySpace on an empty list and BadWeight on any entry that is
/// not a finite positive real.
SpaceRef make_space(std::vector<double> weights);

/// A real-valued function on a MeasureSpace. Immutable; every operation
/// returns a fresh Field.
class Field {
 public:
  Field(SpaceRef space, std::vector<double> values);

  static Field constant(SpaceRef space, double c);
  static Field zero(SpaceRef space) { return constant(std::move(space), 0.0); }

  [[nodiscard]] const SpaceRef& space() const noexcept { return space_; }
  [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
  [[nodiscard]] std::span<const double> values() const noexcept {
    return values_;
  }
  [[nodiscard]] double operator[](std::size_t x) const { return values_[x]; }

  /// Pointwise application of a scalar map.
  [[nodiscard]] Field map(const std::function<double(double)>& fn) const;

  friend Field operator+(const Field& a, const Field& b);
  friend Field operator-(const Field& a, const Field& b);
  friend Field operator-(const Field& a);
  friend Field operator*(double c, const Field& a);
  friend Field operator+(const Field& a, double c);
  friend Field operator-(const Field& a, double c);

 private:
  SpaceRef space_;
  std::vector<double> values_;
};

/// Throws SpaceMismatch unless both fields live on the same space.
void require_same_space(const Field& a, const Field& b);

/// sqrt(sum_x m(x) f(x)^2)
double l2_norm(const Field& f);

/// max_x |f(x)|; weights play no role.
double linf_norm(const Field& f);

/// Weighted inner product sum_x m(x) f(x) g(x).
double inner(const Field& f, const Field& g);

/// True iff f(x) <= g(x) at every point.
bool leq(const Field& f, const Field& g);

}  // namespace ndf
