#pragma once

#include <span>

namespace pcm {

/// Standard normal distribution function, via erfc so both tails keep full
/// relative precision.
double normal_cdf(double x);

/// Upper tail 1 - Phi(x), evaluated as Phi(-x).
double normal_sf(double x);

/// Inverse of normal_cdf on (0, 1).
double normal_quantile(double p);

/// Kolmogorov-Smirnov distance sup_t |F_n(t) - Phi(t)| of a sample.
double ks_distance_to_normal(std::span<const double> sample);

}  // namespace pcm
