#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace scbm {

/// Degree sequence drawn from a truncated discrete power law.
struct DegreeSequence {
  std::vector<std::size_t> degrees;
  double target_mean = 0.0;
  /// Support actually used after calibration.
  int k_min = 0;
  int k_max = 0;
  /// Exact mean of the calibrated distribution.
  double distribution_mean = 0.0;

  std::size_t sum() const;
};

/// Mean of P(k) proportional to k^-gamma on [k_min, k_max].
double power_law_mean(double gamma, int k_min, int k_max);

/// i.i.d. draws from P(k) proportional to k^-gamma with the support tuned so the
/// distribution mean is within 5% of target_mean.
///
/// The lower cutoff is raised from k_min until the mean reaches the band; if it
/// overshoots, the upper cutoff is lowered from k_max. An odd total is fixed by
/// incrementing one uniformly chosen node. Throws InvalidArgument when no
/// support inside [k_min, k_max] reaches the band.
DegreeSequence sample_power_law_degrees(std::size_t n, double gamma, double target_mean, int k_min,
                                        int k_max, std::uint64_t seed);

}  // namespace scbm
