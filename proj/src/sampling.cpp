#include "ndf/sampling.hpp"

#include <algorithm>
#include <cmath>

namespace ndf {

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

Rng Rng::stream(std::uint64_t seed, std::string_view name) {
  return Rng(splitmix(seed ^ splitmix(fnv1a(name))));
}

double Rng::uniform(double lo, double hi) {
  const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

std::size_t Rng::index(std::size_t lo, std::size_t hi) {
  const std::uint64_t span = hi - lo + 1;
  return lo + static_cast<std::size_t>(engine_() % span);
}

double Rng::log_uniform(double lo, double hi) {
  return std::exp(uniform(std::log(lo), std::log(hi)));
}

Field sample_field(const SpaceRef& space, Rng& rng,
                   const FieldSamplerSpec& spec) {
  const std::size_t n = space->size();
  const double a = spec.amplitude;
  std::vector<double> v(n);
  const double mode = rng.uniform(0.0, 1.0);
  if (mode < spec.ramp_fraction) {
    const double start = rng.uniform(-a, a);
    const double end = rng.uniform(-a, a);
    for (std::size_t i = 0; i < n; ++i) {
      const double r = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
      v[i] = start + (end - start) * r;
    }
  } else if (mode < spec.ramp_fraction + spec.step_fraction) {
    const double lo = rng.uniform(-a, a);
    const double hi = rng.uniform(-a, a);
    const std::size_t cut = rng.index(0, n);
    for (std::size_t i = 0; i < n; ++i) v[i] = i < cut ? lo : hi;
  } else {
    for (auto& x : v) x = rng.uniform(-a, a);
  }
  return {space, std::move(v)};
}

double sample_alpha(Rng& rng) {
  if (rng.bernoulli(0.1)) return 0.0;
  return rng.log_uniform(1e-3, 10.0);
}

std::vector<double> sample_breakpoints(Rng& rng, std::size_t k, double range) {
  std::vector<double> x;
  while (x.size() < k) {
    x.clear();
    for (std::size_t i = 0; i < k; ++i) x.push_back(rng.uniform(-range, range));
    std::sort(x.begin(), x.end());
    x.erase(std::unique(x.begin(), x.end()), x.end());
  }
  return x;
}

PLFunction sample_alternating(Rng& rng, const ContractionSamplerSpec& spec) {
  const std::size_t k = rng.index(0, spec.max_k);
  return make_phi(sample_breakpoints(rng, k, spec.breakpoint_range));
}

PLFunction sample_generated(Rng& rng, const ContractionSamplerSpec& spec) {
  const std::size_t depth = rng.index(1, std::max<std::size_t>(1, spec.max_depth));
  PLFunction acc = PLFunction::identity();
  for (std::size_t d = 0; d < depth; ++d) {
    PLFunction g = make_phi(sample_breakpoints(rng, rng.index(0, 2), spec.breakpoint_range));
    if (rng.bernoulli(0.5)) g = compose(PLFunction::negated_identity(), g);
    acc = compose(g, acc);
  }
  return acc;
}

PLFunction sample_envelope(Rng& rng, const ContractionSamplerSpec& spec) {
  const std::size_t m = std::max<std::size_t>(2, spec.envelope_points);
  const double r = spec.breakpoint_range;
  std::vector<double> ys = sample_breakpoints(rng, m, r);
  ys.push_back(0.0);
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
  const auto zero = static_cast<std::size_t>(
      std::find(ys.begin(), ys.end(), 0.0) - ys.begin());

  std::vector<EnvelopeSample> samples(ys.size());
  samples[zero] = {0.0, 0.0};
  for (std::size_t i = zero + 1; i < ys.size(); ++i) {
    const double step = ys[i] - ys[i - 1];
    samples[i] = {ys[i], samples[i - 1].value + rng.uniform(-1.0, 1.0) * step};
  }
  for (std::size_t i = zero; i-- > 0;) {
    const double step = ys[i + 1] - ys[i];
    samples[i] = {ys[i], samples[i + 1].value + rng.uniform(-1.0, 1.0) * step};
  }
  return envelope(samples, r);
}

PLFunction sample_contraction(Rng& rng, const ContractionSamplerSpec& spec) {
  switch (rng.index(0, 2)) {
    case 0: return sample_alternating(rng, spec);
    case 1: return sample_generated(rng, spec);
    default: return sample_envelope(rng, spec);
  }
}

}  // namespace ndf
