#include "scbm/power_law.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "scbm/error.hpp"
#include "scbm/rng.hpp"

namespace scbm {

namespace {

constexpr double kMeanBand = 0.05;

// Prefix sums of w(k) = (k / lo)^-gamma and k w(k) for k in [lo, hi].
struct Prefix {
  std::vector<double> w, kw;
  explicit Prefix(double gamma, int lo, int hi) {
    double sw = 0.0, skw = 0.0;
    for (int k = lo; k <= hi; ++k) {
      const double wk = std::pow(double(k) / double(lo), -gamma);
      sw += wk;
      skw += double(k) * wk;
      w.push_back(sw);
      kw.push_back(skw);
    }
  }
  double mean_up_to(std::size_t i) const { return kw[i] / w[i]; }
};

bool in_band(double mean, double target) { return std::abs(mean - target) <= kMeanBand * target; }

}  // namespace

std::size_t DegreeSequence::sum() const { return std::accumulate(degrees.begin(), degrees.end(), std::size_t{0}); }

double power_law_mean(double gamma, int k_min, int k_max) {
  if (k_min < 1 || k_max < k_min) throw InvalidArgument("power law support must satisfy 1 <= k_min <= k_max");
  Prefix p(gamma, k_min, k_max);
  return p.mean_up_to(p.w.size() - 1);
}

DegreeSequence sample_power_law_degrees(std::size_t n, double gamma, double target_mean, int k_min,
                                        int k_max, std::uint64_t seed) {
  if (n < 2) throw InvalidArgument("power law degrees need n >= 2");
  if (!(gamma > 1.0)) throw InvalidArgument("power law exponent must exceed 1");
  if (k_min < 1) throw InvalidArgument("k_min must be >= 1");
  if (k_max < k_min || static_cast<std::size_t>(k_max) > n - 1)
    throw InvalidArgument("k_max must lie in [k_min, n-1]");
  if (!(target_mean > 0.0)) throw InvalidArgument("target mean degree must be positive");

  int lo = -1, hi = -1;
  double mean = 0.0;
  for (int km = k_min; km <= k_max && lo < 0; ++km) {
    Prefix p(gamma, km, k_max);
    const double full = p.mean_up_to(p.w.size() - 1);
    if (in_band(full, target_mean)) {
      lo = km, hi = k_max, mean = full;
    } else if (full > target_mean) {
      // Overshoot: pick the largest upper cutoff whose mean enters the band.
      for (int kh = k_max; kh >= km; --kh) {
        const double m = p.mean_up_to(static_cast<std::size_t>(kh - km));
        if (in_band(m, target_mean)) {
          lo = km, hi = kh, mean = m;
          break;
        }
        if (m < target_mean) break;
      }
      if (lo < 0)
        throw InvalidArgument("no power-law support in [" + std::to_string(k_min) + ", " +
                              std::to_string(k_max) + "] has mean within 5% of " + std::to_string(target_mean));
    }
  }
  if (lo < 0)
    throw InvalidArgument("power-law mean cannot reach " + std::to_string(target_mean) + " with k_max = " +
                          std::to_string(k_max));

  std::vector<double> weights;
  for (int k = lo; k <= hi; ++k) weights.push_back(std::pow(double(k) / double(lo), -gamma));
  DiscreteSampler draw(weights);
  Rng rng(seed);
  DegreeSequence out;
  out.target_mean = target_mean;
  out.k_min = lo;
  out.k_max = hi;
  out.distribution_mean = mean;
  out.degrees.resize(n);
  for (auto& d : out.degrees) d = static_cast<std::size_t>(lo) + draw(rng);
  if (out.sum() % 2 == 1) ++out.degrees[uniform_index(rng, n)];
  return out;
}

}  // namespace scbm
