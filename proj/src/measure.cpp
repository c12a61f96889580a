#include "ndf/measure.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ndf/error.hpp"

namespace ndf {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptySpace: return "EmptySpace";
    case ErrorCode::BadWeight: return "BadWeight";
    case ErrorCode::SpaceMismatch: return "SpaceMismatch";
    case ErrorCode::NotIncreasing: return "NotIncreasing";
    case ErrorCode::NotAlternating: return "NotAlternating";
    case ErrorCode::InconsistentSamples: return "InconsistentSamples";
    case ErrorCode::BadSpec: return "BadSpec";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::PreconditionFailed: return "PreconditionFailed";
  }
  return "Unknown";
}

bool MeasureSpace::same_as(const MeasureSpace& other) const noexcept {
  return this == &other || weights_ == other.weights_;
}

SpaceRef make_space(std::vector<double> weights) {
  if (weights.empty()) {
    throw Error(ErrorCode::EmptySpace, "measure space needs at least one point");
  }
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!std::isfinite(weights[i]) || weights[i] <= 0.0) {
      throw Error(ErrorCode::BadWeight,
                  "weight " + std::to_string(i) + " must be finite and > 0");
    }
  }
  return SpaceRef(new MeasureSpace(std::move(weights)));
}

Field::Field(SpaceRef space, std::vector<double> values)
    : space_(std::move(space)), values_(std::move(values)) {
  if (!space_) {
    throw Error(ErrorCode::SpaceMismatch, "field without a space");
  }
  if (values_.size() != space_->size()) {
    throw Error(ErrorCode::SpaceMismatch,
                "field has " + std::to_string(values_.size()) +
                    " values on a space of " + std::to_string(space_->size()) +
                    " points");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::BadSpec, "field values must be finite");
    }
  }
}

Field Field::constant(SpaceRef space, double c) {
  const std::size_t n = space->size();
  return Field(std::move(space), std::vector<double>(n, c));
}

Field Field::map(const std::function<double(double)>& fn) const {
  std::vector<double> out(values_.size());
  std::transform(values_.begin(), values_.end(), out.begin(), fn);
  return Field(space_, std::move(out));
}

void require_same_space(const Field& a, const Field& b) {
  if (!a.space()->same_as(*b.space())) {
    throw Error(ErrorCode::SpaceMismatch, "fields live on different spaces");
  }
}

namespace {

template <class Op>
Field zip(const Field& a, const Field& b, Op op) {
  require_same_space(a, b);
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = op(a[i], b[i]);
  return Field(a.space(), std::move(out));
}

}  // namespace

Field operator+(const Field& a, const Field& b) {
  return zip(a, b, [](double x, double y) { return x + y; });
}
Field operator-(const Field& a, const Field& b) {
  return zip(a, b, [](double x, double y) { return x - y; });
}
Field operator-(const Field& a) {
  return a.map([](double x) { return -x; });
}
Field operator*(double c, const Field& a) {
  return a.map([c](double x) { return c * x; });
}
Field operator+(const Field& a, double c) {
  return a.map([c](double x) { return x + c; });
}
Field operator-(const Field& a, double c) {
  return a.map([c](double x) { return x - c; });
}

double l2_norm(const Field& f) { return std::sqrt(inner(f, f)); }

double linf_norm(const Field& f) {
  double m = 0.0;
  for (double v : f.values()) m = std::max(m, std::abs(v));
  return m;
}

double inner(const Field& f, const Field& g) {
  require_same_space(f, g);
  const auto w = f.space()->weights();
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += w[i] * f[i] * g[i];
  return s;
}

bool leq(const Field& f, const Field& g) {
  require_same_space(f, g);
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!(f[i] <= g[i])) return false;
  }
  return true;
}

}  // namespace ndf
