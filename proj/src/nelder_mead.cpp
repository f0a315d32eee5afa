#include "aos/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace aos {

void NelderMeadConfig::validate() const {
  if (!(reflection > 0.0)) throw std::invalid_argument("reflection coefficient must be positive");
  if (!(expansion > reflection)) throw std::invalid_argument("expansion coefficient must exceed reflection");
  if (!(contraction > 0.0 && contraction < 1.0)) throw std::invalid_argument("contraction must lie in (0, 1)");
  if (!(shrink > 0.0 && shrink < 1.0)) throw std::invalid_argument("shrink must lie in (0, 1)");
  if (max_iterations < 0) throw std::invalid_argument("max_iterations must be non-negative");
}

NelderMeadResult nelder_mead(const Objective& objective, std::span<const double> x0, const NelderMeadConfig& config,
                             Sense sense, std::span<const double> initial_step) {
  config.validate();
  const std::size_t n = x0.size();
  if (n == 0) throw std::invalid_argument("Nelder-Mead needs at least one parameter");
  if (!initial_step.empty() && initial_step.size() != n) {
    throw std::invalid_argument("initial step size does not match the parameter count");
  }

  using Point = std::vector<double>;
  NelderMeadResult result;
  const double sign = sense == Sense::Maximize ? -1.0 : 1.0;
  constexpr double kWorst = std::numeric_limits<double>::infinity();

  // Internally always minimizes sign * f.
  auto eval = [&](const Point& x) {
    ++result.evaluations;
    const double f = sign * objective(x);
    return std::isnan(f) ? kWorst : f;
  };

  std::vector<Point> simplex(n + 1, Point(x0.begin(), x0.end()));
  std::vector<double> values(n + 1);
  values[0] = eval(simplex[0]);
  if (!std::isfinite(values[0])) throw NonFiniteObjective();

  result.x = simplex[0];
  result.f = sign * values[0];
  if (config.max_iterations == 0) return result;

  for (std::size_t i = 0; i < n; ++i) {
    simplex[i + 1][i] += initial_step.empty() ? 1.0 : initial_step[i];
    values[i + 1] = eval(simplex[i + 1]);
  }

  std::vector<std::size_t> idx(n + 1);
  Point centroid(n), reflected(n), trial(n);

  auto converged = [&](std::size_t best, std::size_t worst) {
    const double spread = values[worst] - values[best];
    if (!(spread <= config.f_tolerance * std::max(1.0, std::abs(values[best])))) return false;
    for (std::size_t v = 0; v <= n; ++v) {
      for (std::size_t k = 0; k < n; ++k) {
        if (std::abs(simplex[v][k] - simplex[best][k]) > config.x_tolerance) return false;
      }
    }
    return true;
  };

  auto blend = [&](const Point& from, const Point& to, double t, Point& out) {
    for (std::size_t k = 0; k < n; ++k) out[k] = from[k] + t * (to[k] - from[k]);
  };

  while (result.iterations < config.max_iterations) {
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    const std::size_t best = idx.front();
    const std::size_t worst = idx.back();
    const std::size_t second_worst = idx[n - 1];
    if (converged(best, worst)) {
      result.converged = true;
      break;
    }
    ++result.iterations;

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t v : idx) {
      if (v == worst) continue;
      for (std::size_t k = 0; k < n; ++k) centroid[k] += simplex[v][k];
    }
    for (double& c : centroid) c /= static_cast<double>(n);

    blend(centroid, simplex[worst], -config.reflection, reflected);
    const double f_reflected = eval(reflected);

    if (f_reflected < values[best]) {
      blend(centroid, simplex[worst], -config.expansion, trial);
      const double f_expanded = eval(trial);
      if (f_expanded < f_reflected) {
        simplex[worst] = trial;
        values[worst] = f_expanded;
      } else {
        simplex[worst] = reflected;
        values[worst] = f_reflected;
      }
      continue;
    }
    if (f_reflected < values[second_worst]) {
      simplex[worst] = reflected;
      values[worst] = f_reflected;
      continue;
    }

    bool accepted = false;
    if (f_reflected < values[worst]) {
      blend(centroid, reflected, config.contraction, trial);
      const double f_outside = eval(trial);
      if (f_outside <= f_reflected) {
        simplex[worst] = trial;
        values[worst] = f_outside;
        accepted = true;
      }
    } else {
      blend(centroid, simplex[worst], config.contraction, trial);
      const double f_inside = eval(trial);
      if (f_inside < values[worst]) {
        simplex[worst] = trial;
        values[worst] = f_inside;
        accepted = true;
      }
    }
    if (accepted) continue;

    for (std::size_t v = 0; v <= n; ++v) {
      if (v == best) continue;
      blend(simplex[best], simplex[v], config.shrink, simplex[v]);
      values[v] = eval(simplex[v]);
    }
  }

  // The best vertex value never increases, so this is never worse than x0.
  const auto best = static_cast<std::size_t>(std::min_element(values.begin(), values.end()) - values.begin());
  result.x = simplex[best];
  result.f = sign * values[best];
  return result;
}

}  // namespace aos
