#pragma once

#include <cstddef>
#include <cstdint>

namespace aos {

/// Pixel statistics of the occlusion model. Each single-image pixel is an
/// occluder value with probability D, otherwise the signal value.
struct OcclusionStats {
  double D = 0.0;         ///< occlusion probability
  double mu_o = 0.0;      ///< occluder mean
  double sigma2_o = 0.0;  ///< occluder variance
  double mu_s = 0.0;      ///< signal mean
  double sigma2_s = 0.0;  ///< signal variance

  void validate() const;
};

struct ModelMoments {
  double mean = 0.0;
  double second_moment = 0.0;
  double variance = 0.0;
};

/// Variance of one single image: D(1-D)(mu_o-mu_s)^2 + D sigma2_o + (1-D) sigma2_s.
double var_single(const OcclusionStats& stats);

/// Variance of the average of N views: var_single/N + (1-D)^2 (1-1/N) sigma2_s.
double var_integral(const OcclusionStats& stats, int N);

/// First and second moment of the integral pixel, expanded term by term.
/// The variance field is second_moment - mean^2.
ModelMoments model_moments(const OcclusionStats& stats, int N);

struct MonteCarloEstimate {
  ModelMoments moments;
  double mean_standard_error = 0.0;
  double variance_standard_error = 0.0;
  std::size_t num_pixels = 0;
};

/// Samples the generative pixel model: per pixel one signal value shared by
/// all N views, and per view an independent Bernoulli(D) occlusion draw with
/// an independent occluder value. Both value distributions are Gaussian.
///
/// Pixels are generated in fixed-size blocks with per-block seeds, so the
/// result is bit-identical for any worker count.
MonteCarloEstimate monte_carlo_integral(const OcclusionStats& stats, int N, std::size_t num_pixels,
                                        std::uint64_t seed, unsigned workers = 0);

}  // namespace aos
