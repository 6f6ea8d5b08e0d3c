#pragma once

#include <cstdint>

namespace pep {

/// Counter-based pseudo-random generator built on the SplitMix64 finalizer.
/// The i-th output is a pure function of (seed, stream, i), so streams can be
/// split, skipped, and reproduced bit-exactly on any platform.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64();

  /// Uniform draw strictly inside (0,1), 53-bit mantissa.
  double uniform();

  /// Standard normal via the inverse-CDF transform (Wichura's PPND16),
  /// one uniform consumed per draw.
  double normal();

  /// Gamma(shape, 1) via Marsaglia-Tsang squeeze; shape < 1 handled by the
  /// boost g = g1 * u^(1/shape).
  double gamma(double shape);

  double beta(double a, double b);
  double chisq(double df);

  /// Derive an independent stream, e.g. one per replicate or chain.
  CounterRng split(std::uint64_t stream) const;

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Quantile of the standard normal distribution (PPND16 / AS 241),
/// accurate to ~1e-15 for p in (0,1).
double normal_quantile(double p);

}  // namespace pep
