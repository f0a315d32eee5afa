#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace aos {

class NonFiniteObjective : public std::runtime_error {
 public:
  NonFiniteObjective() : std::runtime_error("objective is not finite at the starting point") {}
};

struct NelderMeadConfig {
  double reflection = 1.0;
  double expansion = 2.0;
  double contraction = 0.5;
  double shrink = 0.5;
  /// Converged once the objective spread across the simplex is at most
  /// f_tolerance * max(1, |f_best|) and every vertex lies within
  /// x_tolerance (max-norm) of the best one.
  double f_tolerance = 1e-10;
  double x_tolerance = 1e-8;
  int max_iterations = 2000;

  void validate() const;
};

enum class Sense { Minimize, Maximize };

struct NelderMeadResult {
  std::vector<double> x;
  double f = 0.0;
  bool converged = false;
  int iterations = 0;
  int evaluations = 0;
};

using Objective = std::function<double(std::span<const double>)>;

/// Downhill simplex search. The initial simplex is x0 plus one vertex per
/// coordinate offset by `initial_step` (1.0 for every coordinate when empty).
/// The returned point is the best vertex ever evaluated, so it is never worse
/// than x0. Non-finite values away from x0 rank as worst.
NelderMeadResult nelder_mead(const Objective& objective, std::span<const double> x0, const NelderMeadConfig& config,
                             Sense sense = Sense::Minimize, std::span<const double> initial_step = {});

}  // namespace aos
