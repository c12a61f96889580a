#include "ndf/contraction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ndf/error.hpp"

namespace ndf {

namespace {

constexpr double kSlopeTol = 1e-12;

bool is_unit(double s) { return std::abs(std::abs(s) - 1.0) <= kSlopeTol; }

}  // namespace

PLFunction::PLFunction(std::vector<double> breakpoints,
                       std::vector<double> slopes, double anchor_value)
    : anchor_(anchor_value) {
  if (slopes.size() != breakpoints.size() + 1) {
    throw Error(ErrorCode::BadSpec, "need exactly one slope per interval");
  }
  for (double s : slopes) {
    if (!std::isfinite(s) || std::abs(s) > 1.0 + kSlopeTol) {
      throw Error(ErrorCode::BadSpec, "slope outside [-1, 1]");
    }
  }
  for (double b : breakpoints) {
    if (!std::isfinite(b)) throw Error(ErrorCode::BadSpec, "non-finite breakpoint");
  }
  if (!std::isfinite(anchor_value)) {
    throw Error(ErrorCode::BadSpec, "non-finite anchor value");
  }
  for (std::size_t i = 1; i < breakpoints.size(); ++i) {
    if (breakpoints[i] < breakpoints[i - 1]) {
      throw Error(ErrorCode::NotIncreasing, "breakpoints must be sorted");
    }
  }

  // Piece i spans (breakpoints[i-1], breakpoints[i]). Drop empty pieces, then
  // drop breakpoints that separate equal slopes.
  breakpoints_.reserve(breakpoints.size());
  slopes_.reserve(slopes.size());
  slopes_.push_back(slopes[0]);
  for (std::size_t i = 0; i < breakpoints.size(); ++i) {
    const bool empty_next =
        i + 1 < breakpoints.size() && breakpoints[i + 1] == breakpoints[i];
    if (empty_next) continue;  // piece i+1 has zero length
    if (slopes[i + 1] == slopes_.back()) continue;
    if (!breakpoints_.empty() && breakpoints_.back() == breakpoints[i]) {
      slopes_.back() = slopes[i + 1];
      continue;
    }
    breakpoints_.push_back(breakpoints[i]);
    slopes_.push_back(slopes[i + 1]);
  }
  // A replaced slope may now equal its left neighbour.
  for (std::size_t i = 1; i < slopes_.size();) {
    if (slopes_[i] == slopes_[i - 1]) {
      slopes_.erase(slopes_.begin() + static_cast<std::ptrdiff_t>(i));
      breakpoints_.erase(breakpoints_.begin() + static_cast<std::ptrdiff_t>(i) - 1);
    } else {
      ++i;
    }
  }

  const std::size_t k = breakpoints_.size();
  zero_piece_ = static_cast<std::size_t>(
      std::upper_bound(breakpoints_.begin(), breakpoints_.end(), 0.0) -
      breakpoints_.begin());
  knot_values_.assign(k, 0.0);
  for (std::size_t i = zero_piece_; i < k; ++i) {
    const double prev_x = i == zero_piece_ ? 0.0 : breakpoints_[i - 1];
    const double prev_v = i == zero_piece_ ? anchor_ : knot_values_[i - 1];
    knot_values_[i] = prev_v + slopes_[i] * (breakpoints_[i] - prev_x);
  }
  for (std::size_t i = zero_piece_; i-- > 0;) {
    const double next_x = i + 1 == zero_piece_ ? 0.0 : breakpoints_[i + 1];
    const double next_v = i + 1 == zero_piece_ ? anchor_ : knot_values_[i + 1];
    knot_values_[i] = next_v - slopes_[i + 1] * (next_x - breakpoints_[i]);
  }
}

std::size_t PLFunction::piece_of(double x) const {
  return static_cast<std::size_t>(
      std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x) -
      breakpoints_.begin());
}

double PLFunction::operator()(double x) const {
  const std::size_t j = piece_of(x);
  if (j == zero_piece_) return anchor_ + slopes_[j] * x;
  if (j > zero_piece_) {
    return knot_values_[j - 1] + slopes_[j] * (x - breakpoints_[j - 1]);
  }
  return knot_values_[j] + slopes_[j] * (x - breakpoints_[j]);
}

double PLFunction::slope_at(double x) const { return slopes_[piece_of(x)]; }

bool PLFunction::approx_equal(const PLFunction& other, double tol) const {
  if (breakpoints_.size() != other.breakpoints_.size()) return false;
  for (std::size_t i = 0; i < breakpoints_.size(); ++i) {
    if (std::abs(breakpoints_[i] - other.breakpoints_[i]) > tol) return false;
  }
  for (std::size_t i = 0; i < slopes_.size(); ++i) {
    if (std::abs(slopes_[i] - other.slopes_[i]) > tol) return false;
  }
  return std::abs(anchor_ - other.anchor_) <= tol;
}

std::string to_string(const ContractionClass& c) {
  switch (c.kind) {
    case ContractionClass::Kind::F: return "F(" + std::to_string(c.k) + ")";
    case ContractionClass::Kind::G: return "G";
    case ContractionClass::Kind::GeneralNormal: return "GeneralNormal";
    case ContractionClass::Kind::NotNormal: return "NotNormal";
  }
  return "?";
}

PLFunction make_phi(std::vector<double> breakpoints) {
  for (std::size_t i = 1; i < breakpoints.size(); ++i) {
    if (!(breakpoints[i] > breakpoints[i - 1])) {
      throw Error(ErrorCode::NotIncreasing,
                  "breakpoints must be strictly increasing");
    }
  }
  std::vector<double> slopes(breakpoints.size() + 1);
  for (std::size_t i = 0; i < slopes.size(); ++i) {
    slopes[i] = i % 2 == 0 ? 1.0 : -1.0;
  }
  return {std::move(breakpoints), std::move(slopes), 0.0};
}

PLFunction compose(const PLFunction& outer, const PLFunction& inner) {
  const auto ib = inner.breakpoints();
  const auto is = inner.slopes();
  const auto ob = outer.breakpoints();

  std::vector<double> cuts(ib.begin(), ib.end());
  for (std::size_t j = 0; j < is.size(); ++j) {
    const double s = is[j];
    if (s == 0.0) continue;  // constant piece: no preimages of outer kinks
    const double lo = j == 0 ? -std::numeric_limits<double>::infinity() : ib[j - 1];
    const double hi = j == ib.size() ? std::numeric_limits<double>::infinity() : ib[j];
    double x_ref = 0.0;
    if (j > 0) {
      x_ref = lo;
    } else if (!ib.empty()) {
      x_ref = hi;
    }
    const double y_ref = inner(x_ref);
    for (double b : ob) {
      const double x = x_ref + (b - y_ref) / s;
      if (x > lo && x < hi) cuts.push_back(x);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  std::vector<double> merged;
  merged.reserve(cuts.size());
  for (double c : cuts) {
    if (merged.empty() || c - merged.back() > 1e-12 * (1.0 + std::abs(c))) {
      merged.push_back(c);
    }
  }

  std::vector<double> slopes(merged.size() + 1);
  for (std::size_t j = 0; j < slopes.size(); ++j) {
    double probe = 0.0;
    if (merged.empty()) {
      probe = 0.0;
    } else if (j == 0) {
      probe = merged.front() - 1.0;
    } else if (j == merged.size()) {
      probe = merged.back() + 1.0;
    } else {
      probe = 0.5 * (merged[j - 1] + merged[j]);
    }
    const double s_in = inner.slope_at(probe);
    slopes[j] = s_in == 0.0 ? 0.0 : s_in * outer.slope_at(inner(probe));
  }
  return {std::move(merged), std::move(slopes), outer(inner(0.0))};
}

namespace {

bool is_alternating(const PLFunction& phi) {
  if (std::abs(phi.anchor_value()) > kSlopeTol) return false;
  const auto s = phi.slopes();
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double want = i % 2 == 0 ? 1.0 : -1.0;
    if (std::abs(s[i] - want) > kSlopeTol) return false;
  }
  return true;
}

}  // namespace

Decomposition decompose(const PLFunction& phi) {
  if (!is_alternating(phi)) {
    throw Error(ErrorCode::NotAlternating,
                "decompose needs an alternating contraction (some F_k)");
  }
  std::vector<double> x(phi.breakpoints().begin(), phi.breakpoints().end());
  std::vector<PLFunction> peeled;  // innermost first

  while (x.size() >= 3) {
    const std::size_t k = x.size();
    std::size_t i = 0;
    for (std::size_t j = 1; j + 1 < k; ++j) {
      if (x[j + 1] - x[j] < x[i + 1] - x[i]) i = j;
    }
    const double lo = x[i];
    const double hi = x[i + 1];
    const double gap = hi - lo;
    peeled.push_back(make_phi({lo, hi}));

    std::vector<double> next;
    next.reserve(k - 2);
    for (std::size_t j = 0; j < i; ++j) {
      if (hi <= 0.0) {
        next.push_back(x[j] + 2.0 * gap);
      } else if (lo >= 0.0) {
        next.push_back(x[j]);
      } else {
        next.push_back(x[j] - 2.0 * lo);
      }
    }
    for (std::size_t j = i + 2; j < k; ++j) {
      if (hi <= 0.0) {
        next.push_back(x[j]);
      } else if (lo >= 0.0) {
        next.push_back(x[j] - 2.0 * gap);
      } else {
        next.push_back(x[j] - 2.0 * hi);
      }
    }
    x = std::move(next);
  }

  Decomposition d;
  if (x.size() == 2) {
    d.factors.push_back(make_phi(x));
  } else {
    d.residual = make_phi(x);
  }
  d.factors.insert(d.factors.end(), peeled.rbegin(), peeled.rend());
  return d;
}

PLFunction recompose(const Decomposition& d) {
  PLFunction acc = PLFunction::identity();
  for (auto it = d.factors.rbegin(); it != d.factors.rend(); ++it) {
    acc = compose(*it, acc);
  }
  return compose(d.residual, acc);
}

PLFunction envelope(std::span<const EnvelopeSample> samples, double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw Error(ErrorCode::BadSpec, "envelope radius must be positive");
  }
  if (samples.empty()) {
    throw Error(ErrorCode::InconsistentSamples, "no samples");
  }
  std::vector<EnvelopeSample> s(samples.begin(), samples.end());
  std::sort(s.begin(), s.end(),
            [](const auto& a, const auto& b) { return a.y < b.y; });
  bool has_origin = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!std::isfinite(s[i].y) || !std::isfinite(s[i].value)) {
      throw Error(ErrorCode::InconsistentSamples, "non-finite sample");
    }
    if (s[i].y == 0.0 && s[i].value == 0.0) has_origin = true;
    if (i > 0 && s[i].y == s[i - 1].y) {
      throw Error(ErrorCode::InconsistentSamples, "repeated sample location");
    }
  }
  if (!has_origin) {
    throw Error(ErrorCode::InconsistentSamples, "samples must contain (0, 0)");
  }
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = i + 1; j < s.size(); ++j) {
      const double slack = 1e-12 * (1.0 + std::abs(s[j].y - s[i].y));
      if (std::abs(s[j].value - s[i].value) > s[j].y - s[i].y + slack) {
        throw Error(ErrorCode::InconsistentSamples,
                    "samples are not 1-Lipschitz");
      }
    }
  }

  // Between neighbouring samples the minimum of cones rises from the left
  // sample and falls into the right one; farther samples never win.
  std::vector<double> bps;
  std::vector<double> slopes{-1.0};
  for (std::size_t j = 0; j < s.size(); ++j) {
    bps.push_back(s[j].y);
    if (j + 1 == s.size()) break;
    const double peak =
        0.5 * (s[j].y + s[j + 1].y + s[j + 1].value - s[j].value);
    bps.push_back(std::clamp(peak, s[j].y, s[j + 1].y));
    slopes.push_back(1.0);
    slopes.push_back(-1.0);
  }
  slopes.push_back(1.0);
  const PLFunction full(bps, slopes, 0.0);

  if (s.front().y >= -radius && s.back().y <= radius) return full;

  std::vector<double> cut_bps{-radius};
  std::vector<double> cut_slopes{-1.0};
  for (std::size_t i = 0; i < full.breakpoints().size(); ++i) {
    const double b = full.breakpoints()[i];
    if (b > -radius && b < radius) cut_bps.push_back(b);
  }
  for (std::size_t i = 1; i < cut_bps.size(); ++i) {
    cut_slopes.push_back(full.slope_at(cut_bps[i - 1]));
  }
  cut_slopes.push_back(full.slope_at(cut_bps.back()));
  cut_bps.push_back(radius);
  cut_slopes.push_back(1.0);
  return {cut_bps, cut_slopes, full(0.0)};
}

bool is_normal_contraction(const PLFunction& phi) {
  if (std::abs(phi.anchor_value()) > kSlopeTol) return false;
  for (double s : phi.slopes()) {
    if (std::abs(s) > 1.0 + kSlopeTol) return false;
  }
  return true;
}

ContractionClass classify(const PLFunction& phi) {
  if (is_alternating(phi)) return ContractionClass::F(phi.breakpoints().size());
  if (!is_normal_contraction(phi)) return ContractionClass::not_normal();
  const auto s = phi.slopes();
  const bool unit = std::all_of(s.begin(), s.end(), is_unit);
  if (unit && phi.breakpoints().size() <= 2) return ContractionClass::G();
  return ContractionClass::general_normal();
}

}  // namespace ndf
