#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "qwalk/observables.hpp"

namespace qwalk {

/// One point of an alpha grid: the coordinate as requested (so an endpoint
/// of 1.0 stays 1.0) and the flux used by the walk.
struct AlphaPoint {
  double coordinate = 0.0;
  FluxRatio flux;
};

/// `count` evenly spaced exact rational points over [lo, hi].
std::vector<AlphaPoint> alpha_grid(const Fraction& lo, const Fraction& hi, int count);
/// `count` evenly spaced real points over [lo, hi], used as plain reals.
std::vector<AlphaPoint> alpha_grid(double lo, double hi, int count);

struct SweepResult {
  std::vector<AlphaPoint> alphas;
  std::vector<int> step_counts;
  /// rows[i][j]: observable after step_counts[i] steps at alphas[j].
  std::vector<std::vector<double>> rows;
  bool normalized = false;
};

struct SweepOptions {
  Observable observable = Observable::Variance;
  BlochAngles init = BlochAngles::symmetric();
  bool normalize = false;
  unsigned threads = 0;  // 0: hardware concurrency
};

/// One walk per alpha, run to the largest requested step count, sampled at
/// every requested count. Results land in preallocated slots, so the output
/// does not depend on scheduling.
SweepResult sweep_alpha(const std::vector<AlphaPoint>& alphas, const std::vector<int>& step_counts,
                        const SweepOptions& options = {});

/// Divides a row by its maximum. Rows whose maximum is not positive are left alone.
void normalize_row(std::vector<double>& row);

/// Index of the largest entry; ties go to the smallest index.
std::size_t argmax(const std::vector<double>& row);

/// Records t = 0 .. t_max of a single walk.
ObservableSeries time_series(const FluxRatio& alpha, const BlochAngles& init, int t_max);

/// Gaussian smoothing, kernel truncated at 3 sigma and renormalized at the
/// edges. For sigma < 0.5 the kernel collapses to the identity.
std::vector<double> gaussian_smooth(const std::vector<double>& series, double sigma);

struct Convergent {
  std::int64_t p = 0;
  std::int64_t q = 1;
  double err = 0.0;  // |p/q - x|
};

/// Continued-fraction convergents of x, at most `depth` of them, stopping
/// early when the expansion terminates in double precision.
std::vector<Convergent> convergents(double x, int depth);

struct ScalingFit {
  double exponent = 0.0;
  int t_lo = 0;
  int t_hi = 0;
  double residual = 0.0;  // RMS of log-space deviations
};

/// Least-squares slope of log(variance) against log(t) for t in [t_lo, t_hi].
ScalingFit scaling_fit(const ObservableSeries& series, int t_lo, int t_hi);

/// surface[i][j]: mean entropy over the final `avg_window` steps (t_max -
/// avg_window, t_max] for initial coin (theta_grid[i], phi_grid[j]).
std::vector<std::vector<double>> entanglement_surface(const std::vector<double>& theta_grid,
                                                      const std::vector<double>& phi_grid, const FluxRatio& alpha,
                                                      int t_max, int avg_window, unsigned threads = 0);

/// Runs job(i) for i in [0, count) on a pool of `threads` workers.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& job);

/// n evenly spaced values over [lo, hi] inclusive.
std::vector<double> linspace(double lo, double hi, int n);

}  // namespace qwalk
