#include "aos/variance_model.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <thread>
#include <vector>

namespace aos {

namespace {

constexpr std::size_t kBlockSize = 1 << 16;

void require_count(int N) {
  if (N < 1) throw std::invalid_argument("number of integrated images must be at least 1");
}

void fill_block(const OcclusionStats& stats, int N, std::uint64_t seed, std::size_t block, double* out,
                std::size_t count) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32)};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> signal(stats.mu_s, std::sqrt(stats.sigma2_s));
  std::normal_distribution<double> occluder(stats.mu_o, std::sqrt(stats.sigma2_o));
  std::bernoulli_distribution occluded(std::clamp(stats.D, 0.0, 1.0));
  const bool never = stats.D <= 0.0;
  const bool always = stats.D >= 1.0;

  for (std::size_t p = 0; p < count; ++p) {
    const double rsig = signal(rng);
    double sum = 0.0;
    for (int i = 0; i < N; ++i) {
      const bool z = always || (!never && occluded(rng));
      sum += z ? occluder(rng) : rsig;
    }
    out[p] = sum / N;
  }
}

}  // namespace

void OcclusionStats::validate() const {
  if (!(D >= 0.0 && D <= 1.0)) throw std::invalid_argument("occlusion probability D must lie in [0, 1]");
  if (!(sigma2_o >= 0.0)) throw std::invalid_argument("occluder variance must be non-negative");
  if (!(sigma2_s >= 0.0)) throw std::invalid_argument("signal variance must be non-negative");
}

double var_single(const OcclusionStats& s) {
  const double d = s.mu_o - s.mu_s;
  return s.D * (1.0 - s.D) * d * d + s.D * s.sigma2_o + (1.0 - s.D) * s.sigma2_s;
}

double var_integral(const OcclusionStats& s, int N) {
  require_count(N);
  const double n = N;
  const double visible = 1.0 - s.D;
  return var_single(s) / n + visible * visible * (1.0 - 1.0 / n) * s.sigma2_s;
}

ModelMoments model_moments(const OcclusionStats& s, int N) {
  require_count(N);
  const double n = N;
  const double D = s.D;
  const double V = 1.0 - D;
  const double own = D * (s.sigma2_o + s.mu_o * s.mu_o) + V * (s.sigma2_s + s.mu_s * s.mu_s);
  const double cross = D * D * s.mu_o * s.mu_o + 2.0 * D * V * s.mu_s * s.mu_o + V * V * (s.sigma2_s + s.mu_s * s.mu_s);

  ModelMoments m;
  m.mean = D * s.mu_o + V * s.mu_s;
  m.second_moment = (n * own + n * (n - 1.0) * cross) / (n * n);
  m.variance = m.second_moment - m.mean * m.mean;
  return m;
}

MonteCarloEstimate monte_carlo_integral(const OcclusionStats& stats, int N, std::size_t num_pixels,
                                        std::uint64_t seed, unsigned workers) {
  stats.validate();
  require_count(N);
  if (num_pixels < 2) throw std::invalid_argument("Monte-Carlo estimate needs at least 2 pixels");

  std::vector<double> values(num_pixels);
  const std::size_t blocks = (num_pixels + kBlockSize - 1) / kBlockSize;
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, blocks));

  auto run = [&](unsigned worker) {
    for (std::size_t b = worker; b < blocks; b += workers) {
      const std::size_t begin = b * kBlockSize;
      const std::size_t count = std::min(kBlockSize, num_pixels - begin);
      fill_block(stats, N, seed, b, values.data() + begin, count);
    }
  };
  if (workers <= 1) {
    run(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run, w);
  }

  const double n = static_cast<double>(num_pixels);
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / n;
  double m2 = 0.0;
  double m4 = 0.0;
  for (double v : values) {
    const double d2 = (v - mean) * (v - mean);
    m2 += d2;
    m4 += d2 * d2;
  }
  m2 /= n;
  m4 /= n;

  MonteCarloEstimate est;
  est.num_pixels = num_pixels;
  est.moments.mean = mean;
  est.moments.variance = m2;
  est.moments.second_moment = m2 + mean * mean;
  est.mean_standard_error = std::sqrt(m2 / n);
  est.variance_standard_error = std::sqrt(std::max(0.0, m4 - m2 * m2) / n);
  return est;
}

}  // namespace aos
