#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "ndf/contraction.hpp"
#include "ndf/measure.hpp"

namespace ndf {

/// Seeded 64-bit stream. Floating-point draws are built from raw bits so
/// that a given seed produces the same numbers on every standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Independent stream keyed by (seed, name).
  static Rng stream(std::uint64_t seed, std::string_view name);

  double uniform(double lo, double hi);
  /// Uniform integer in [lo, hi].
  std::size_t index(std::size_t lo, std::size_t hi);
  bool bernoulli(double p) { return uniform(0.0, 1.0) < p; }
  double log_uniform(double lo, double hi);

 private:
  std::mt19937_64 engine_;
};

struct FieldSamplerSpec {
  double amplitude = 2.0;
  double ramp_fraction = 0.25;  ///< monotone ramps
  double step_fraction = 0.25;  ///< two-level step functions
};

struct ContractionSamplerSpec {
  std::size_t max_k = 8;
  double breakpoint_range = 2.0;
  std::size_t max_depth = 3;
  std::size_t envelope_points = 9;
};

/// Mix of i.i.d. uniform values, monotone ramps and two-level steps.
Field sample_field(const SpaceRef& space, Rng& rng, const FieldSamplerSpec& spec);

/// 0 with probability 0.1, otherwise log-uniform on [1e-3, 10].
double sample_alpha(Rng& rng);

/// Sorted, strictly increasing breakpoints drawn uniformly from [-range, range].
std::vector<double> sample_breakpoints(Rng& rng, std::size_t k, double range);

/// Random element of F_k with k uniform in [0, spec.max_k].
PLFunction sample_alternating(Rng& rng, const ContractionSamplerSpec& spec);

/// Composition of 1..max_depth random elements of G.
PLFunction sample_generated(Rng& rng, const ContractionSamplerSpec& spec);

/// Lipschitz envelope of random 1-Lipschitz data through (0, 0).
PLFunction sample_envelope(Rng& rng, const ContractionSamplerSpec& spec);

/// One of the three families above, chosen uniformly.
PLFunction sample_contraction(Rng& rng, const ContractionSamplerSpec& spec);

}  // namespace ndf
