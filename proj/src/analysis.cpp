#include "qwalk/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

namespace qwalk {
namespace {

__int128 gcd128(__int128 a, __int128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    const __int128 r = a % b;
    a = b;
    b = r;
  }
  return a;
}

}  // namespace

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& job) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        job(i);
      } catch (...) {
        const std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = count;
      }
    }
  };
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (unsigned k = 0; k < threads; ++k) pool.emplace_back(worker);
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

std::vector<double> linspace(double lo, double hi, int n) {
  if (n < 1) throw ParameterError("grid needs at least one point");
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    out[static_cast<std::size_t>(k)] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(k) / (n - 1);
  }
  return out;
}

std::vector<AlphaPoint> alpha_grid(const Fraction& lo, const Fraction& hi, int count) {
  if (count < 1) throw ParameterError("alpha grid needs at least one point");
  std::vector<AlphaPoint> out;
  out.reserve(static_cast<std::size_t>(count));
  const __int128 span = count == 1 ? 1 : count - 1;
  const __int128 base = static_cast<__int128>(lo.p) * hi.q * span;
  const __int128 delta = static_cast<__int128>(hi.p) * lo.q - static_cast<__int128>(lo.p) * hi.q;
  const __int128 den = static_cast<__int128>(lo.q) * hi.q * span;
  constexpr auto kMax = static_cast<__int128>(std::numeric_limits<std::int64_t>::max());
  for (int k = 0; k < count; ++k) {
    __int128 num = base + delta * k;
    __int128 d = den;
    const __int128 g = gcd128(num, d);
    if (g > 1) {
      num /= g;
      d /= g;
    }
    if (num > kMax || -num > kMax || d > kMax) throw ParameterError("alpha grid point does not fit in 64 bits");
    const auto p = static_cast<std::int64_t>(num);
    const auto q = static_cast<std::int64_t>(d);
    out.push_back({static_cast<double>(static_cast<long double>(p) / static_cast<long double>(q)),
                   FluxRatio::rational(p, q)});
  }
  return out;
}

std::vector<AlphaPoint> alpha_grid(double lo, double hi, int count) {
  std::vector<AlphaPoint> out;
  for (double v : linspace(lo, hi, count)) out.push_back({v, FluxRatio::irrational(v)});
  return out;
}

void normalize_row(std::vector<double>& row) {
  if (row.empty()) return;
  const double peak = *std::max_element(row.begin(), row.end());
  if (!(peak > 0.0)) return;
  for (double& v : row) v /= peak;
}

std::size_t argmax(const std::vector<double>& row) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < row.size(); ++i) {
    if (row[i] > row[best]) best = i;
  }
  return best;
}

SweepResult sweep_alpha(const std::vector<AlphaPoint>& alphas, const std::vector<int>& step_counts,
                        const SweepOptions& options) {
  if (alphas.empty() || step_counts.empty()) throw ParameterError("sweep grid is empty");
  for (int t : step_counts) {
    if (t < 1) throw ParameterError("sweep step counts must be positive");
  }
  const int t_max = *std::max_element(step_counts.begin(), step_counts.end());

  SweepResult result;
  result.alphas = alphas;
  result.step_counts = step_counts;
  result.rows.assign(step_counts.size(), std::vector<double>(alphas.size(), 0.0));

  parallel_for(alphas.size(), options.threads, [&](std::size_t j) {
    WalkerState state = new_state(options.init, t_max, alphas[j].flux);
    evolve(state, t_max, [&](const WalkerState& s) {
      for (std::size_t i = 0; i < step_counts.size(); ++i) {
        if (step_counts[i] == s.step_count()) result.rows[i][j] = select(measure(s), options.observable);
      }
    });
  });

  if (options.normalize) {
    for (auto& row : result.rows) normalize_row(row);
    result.normalized = true;
  }
  return result;
}

ObservableSeries time_series(const FluxRatio& alpha, const BlochAngles& init, int t_max) {
  if (t_max < 1) throw ParameterError("t_max must be positive");
  WalkerState state = new_state(init, t_max, alpha);
  ObservableSeries series;
  series.reserve(static_cast<std::size_t>(t_max) + 1);
  series.push_back(measure(state));
  evolve(state, t_max, [&](const WalkerState& s) { series.push_back(measure(s)); });
  return series;
}

std::vector<double> gaussian_smooth(const std::vector<double>& series, double sigma) {
  if (series.empty()) throw ParameterError("cannot smooth an empty series");
  if (!std::isfinite(sigma) || sigma <= 0.0) throw ParameterError("smoothing sigma must be positive");
  for (double v : series) {
    if (!std::isfinite(v)) throw ParameterError("cannot smooth non-finite values");
  }
  if (sigma < 0.5) return series;

  const int radius = static_cast<int>(std::floor(3.0 * sigma));
  std::vector<double> weights(static_cast<std::size_t>(2 * radius + 1));
  for (int k = -radius; k <= radius; ++k) {
    weights[static_cast<std::size_t>(k + radius)] = std::exp(-0.5 * (k * k) / (sigma * sigma));
  }

  const auto n = static_cast<int>(series.size());
  std::vector<double> out(series.size());
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    double mass = 0.0;
    for (int k = std::max(-radius, -i); k <= std::min(radius, n - 1 - i); ++k) {
      const double w = weights[static_cast<std::size_t>(k + radius)];
      acc += w * series[static_cast<std::size_t>(i + k)];
      mass += w;
    }
    out[static_cast<std::size_t>(i)] = acc / mass;
  }
  return out;
}

std::vector<Convergent> convergents(double x, int depth) {
  if (!std::isfinite(x)) throw ParameterError("cannot expand a non-finite number");
  if (depth < 1) throw ParameterError("convergent depth must be positive");

  std::vector<Convergent> out;
  const long double target = x;
  long double remainder = target;
  std::int64_t p_prev = 1, q_prev = 0;  // p_{-1}, q_{-1}
  std::int64_t p_prev2 = 0, q_prev2 = 1;  // p_{-2}, q_{-2}
  for (int i = 0; i < depth; ++i) {
    const long double term = std::floor(remainder);
    if (term > static_cast<long double>(std::numeric_limits<std::int32_t>::max())) break;
    const auto a = static_cast<std::int64_t>(term);
    std::int64_t p = 0;
    std::int64_t q = 0;
    if (__builtin_mul_overflow(a, p_prev, &p) || __builtin_add_overflow(p, p_prev2, &p) ||
        __builtin_mul_overflow(a, q_prev, &q) || __builtin_add_overflow(q, q_prev2, &q)) {
      break;
    }
    const double err = static_cast<double>(std::fabs(static_cast<long double>(p) - q * target) / q);
    // Past the precision of x the expansion turns into noise; stop before the
    // error sequence stops decreasing.
    if (!out.empty() && !(err < out.back().err)) break;
    out.push_back({p, q, err});
    p_prev2 = p_prev;
    q_prev2 = q_prev;
    p_prev = p;
    q_prev = q;
    const long double frac = remainder - term;
    if (err == 0.0 || frac == 0.0L) break;
    remainder = 1.0L / frac;
  }
  return out;
}

ScalingFit scaling_fit(const ObservableSeries& series, int t_lo, int t_hi) {
  if (t_lo < 1 || t_hi < t_lo) throw ParameterError("scaling window must satisfy 1 <= t_lo <= t_hi");
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& r : series) {
    if (r.t < t_lo || r.t > t_hi) continue;
    if (!(r.variance > 0.0)) {
      throw ParameterError("scaling window contains zero variance at t=" + std::to_string(r.t));
    }
    xs.push_back(std::log(static_cast<double>(r.t)));
    ys.push_back(std::log(r.variance));
  }
  if (xs.size() < 10) throw ParameterError("scaling window needs at least 10 points");

  const auto count = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= count;
  my /= count;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dev = ys[i] - (intercept + slope * xs[i]);
    ss += dev * dev;
  }
  return {slope, t_lo, t_hi, std::sqrt(ss / count)};
}

std::vector<std::vector<double>> entanglement_surface(const std::vector<double>& theta_grid,
                                                      const std::vector<double>& phi_grid, const FluxRatio& alpha,
                                                      int t_max, int avg_window, unsigned threads) {
  if (theta_grid.empty() || phi_grid.empty()) throw ParameterError("surface grid is empty");
  if (avg_window < 1 || avg_window > t_max) throw ParameterError("averaging window must lie in [1, t_max]");

  std::vector<std::vector<double>> surface(theta_grid.size(), std::vector<double>(phi_grid.size(), 0.0));
  const std::size_t cols = phi_grid.size();
  parallel_for(theta_grid.size() * cols, threads, [&](std::size_t job) {
    const std::size_t i = job / cols;
    const std::size_t j = job % cols;
    WalkerState state = new_state(BlochAngles::make(theta_grid[i], phi_grid[j]), t_max, alpha);
    double sum = 0.0;
    evolve(state, t_max, [&](const WalkerState& s) {
      if (s.step_count() > t_max - avg_window) sum += entanglement_entropy(coin_density(s));
    });
    surface[i][j] = sum / avg_window;
  });
  return surface;
}

}  // namespace qwalk
