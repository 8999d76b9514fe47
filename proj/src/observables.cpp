#include "qwalk/observables.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "denormals.hpp"

namespace qwalk {
namespace {

bool in_origin_region(int n, int m) {
  return std::abs(n) <= 2 && std::abs(m) <= 2 && (n & 1) == 0 && (m & 1) == 0;
}

}  // namespace

ProbabilityMap::ProbabilityMap(int step, int radius_x, int radius_y)
    : step_(step),
      radius_x_(radius_x),
      radius_y_(radius_y),
      probs_(static_cast<std::size_t>(2 * radius_x + 1) * static_cast<std::size_t>(2 * radius_y + 1), 0.0) {}

double ProbabilityMap::at(int n, int m) const {
  if (std::abs(n) > radius_x_ || std::abs(m) > radius_y_) return 0.0;
  return probs_[index(n, m)];
}

void ProbabilityMap::set(int n, int m, double p) {
  if (std::abs(n) > radius_x_ || std::abs(m) > radius_y_) throw std::out_of_range("site outside probability map");
  probs_[index(n, m)] = p;
}

double ProbabilityMap::total() const {
  double sum = 0.0;
  for (double p : probs_) sum += p;
  return sum;
}

std::array<double, 2> CoinDensity::eigenvalues() const {
  const double half_trace = 0.5 * trace();
  const double half_gap = 0.5 * (rho[0][0].real() - rho[1][1].real());
  const double radius = std::sqrt(half_gap * half_gap + std::norm(rho[0][1]));
  return {half_trace - radius, half_trace + radius};
}

double select(const ObservableRecord& r, Observable which) {
  switch (which) {
    case Observable::Variance: return r.variance;
    case Observable::OriginRegion: return r.origin_region_prob;
    case Observable::ParticipationRatio: return r.participation_ratio;
    case Observable::Entropy: return r.entanglement_entropy;
  }
  return 0.0;
}

ProbabilityMap probability_map(const WalkerState& state) {
  const detail::ScopedFlushDenormals ftz;
  ProbabilityMap pm(state.step_count(), state.extent_x(), state.extent_y());
  state.for_each_row([&](int n, int m_first, std::span<const CoinPair> sites) {
    for (std::size_t k = 0; k < sites.size(); ++k) {
      pm.set(n, m_first + 2 * static_cast<int>(k), std::norm(sites[k].c0) + std::norm(sites[k].c1));
    }
  });
  return pm;
}

double variance(const ProbabilityMap& pm) {
  double sum = 0.0;
  for (int n = -pm.radius_x(); n <= pm.radius_x(); ++n) {
    for (int m = -pm.radius_y(); m <= pm.radius_y(); ++m) {
      sum += static_cast<double>(n * n + m * m) * pm.at(n, m);
    }
  }
  return sum;
}

double origin_region_probability(const ProbabilityMap& pm) {
  double sum = 0.0;
  for (int n = -2; n <= 2; n += 2) {
    for (int m = -2; m <= 2; m += 2) sum += pm.at(n, m);
  }
  return sum;
}

double participation_ratio(const ProbabilityMap& pm) {
  double sum = 0.0;
  for (int n = -pm.radius_x(); n <= pm.radius_x(); ++n) {
    for (int m = -pm.radius_y(); m <= pm.radius_y(); ++m) {
      const double p = pm.at(n, m);
      sum += p * p;
    }
  }
  return 1.0 / sum;
}

CoinDensity coin_density(const WalkerState& state) {
  const detail::ScopedFlushDenormals ftz;
  double r00 = 0.0;
  double r11 = 0.0;
  Complex r01{};
  state.for_each_row([&](int, int, std::span<const CoinPair> sites) {
    for (const CoinPair& a : sites) {
      r00 += std::norm(a.c0);
      r11 += std::norm(a.c1);
      r01 += a.c0 * std::conj(a.c1);
    }
  });
  CoinDensity out;
  out.rho = {{{Complex{r00, 0.0}, r01}, {std::conj(r01), Complex{r11, 0.0}}}};
  return out;
}

double entanglement_entropy(const CoinDensity& rho) {
  double entropy = 0.0;
  for (double lambda : rho.eigenvalues()) {
    lambda = std::clamp(lambda, 0.0, 1.0);
    if (lambda > 0.0) entropy -= lambda * std::log2(lambda);
  }
  return std::clamp(entropy, 0.0, 1.0);
}

ObservableRecord measure(const WalkerState& state) {
  const detail::ScopedFlushDenormals ftz;
  double second_moment = 0.0;
  double origin = 0.0;
  double sum_sq = 0.0;
  double r00 = 0.0;
  double r11 = 0.0;
  Complex r01{};
  state.for_each_row([&](int n, int m_first, std::span<const CoinPair> sites) {
    double row_moment = 0.0;
    double row_p = 0.0;
    for (std::size_t k = 0; k < sites.size(); ++k) {
      const CoinPair& a = sites[k];
      const int m = m_first + 2 * static_cast<int>(k);
      const double p0 = std::norm(a.c0);
      const double p1 = std::norm(a.c1);
      const double p = p0 + p1;
      r00 += p0;
      r11 += p1;
      r01 += a.c0 * std::conj(a.c1);
      row_p += p;
      row_moment += static_cast<double>(m * m) * p;
      sum_sq += p * p;
      if (in_origin_region(n, m)) origin += p;
    }
    second_moment += row_moment + static_cast<double>(n * n) * row_p;
  });
  CoinDensity rho;
  rho.rho = {{{Complex{r00, 0.0}, r01}, {std::conj(r01), Complex{r11, 0.0}}}};
  return {state.step_count(), second_moment, origin, 1.0 / sum_sq, entanglement_entropy(rho)};
}

}  // namespace qwalk
