#pragma once

#include <array>
#include <vector>

#include "qwalk/walker.hpp"

namespace qwalk {

/// Site probabilities P(n,m) = |a0|^2 + |a1|^2 over the state's support box.
class ProbabilityMap {
 public:
  ProbabilityMap(int step, int radius_x, int radius_y);

  int step() const { return step_; }
  int radius_x() const { return radius_x_; }
  int radius_y() const { return radius_y_; }

  /// Zero for sites outside the stored box.
  double at(int n, int m) const;
  void set(int n, int m, double p);

  double total() const;

 private:
  std::size_t index(int n, int m) const {
    return static_cast<std::size_t>(n + radius_x_) * static_cast<std::size_t>(2 * radius_y_ + 1) +
           static_cast<std::size_t>(m + radius_y_);
  }

  int step_;
  int radius_x_;
  int radius_y_;
  std::vector<double> probs_;
};

/// Reduced coin density matrix, position traced out.
struct CoinDensity {
  std::array<std::array<Complex, 2>, 2> rho{};

  Complex operator()(int r, int c) const { return rho[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)]; }
  double trace() const { return rho[0][0].real() + rho[1][1].real(); }
  /// Ascending, from the closed 2x2 form tr/2 -+ sqrt(((r00 - r11)/2)^2 + |r01|^2).
  std::array<double, 2> eigenvalues() const;
};

/// All per-step scalars at once.
struct ObservableRecord {
  int t = 0;
  double variance = 0.0;
  double origin_region_prob = 0.0;
  double participation_ratio = 0.0;
  double entanglement_entropy = 0.0;
};

using ObservableSeries = std::vector<ObservableRecord>;

enum class Observable { Variance, OriginRegion, ParticipationRatio, Entropy };

double select(const ObservableRecord& record, Observable which);

ProbabilityMap probability_map(const WalkerState& state);

/// Raw second moment sum (n^2 + m^2) P(n,m) about the origin.
double variance(const ProbabilityMap& pm);

/// Sum of P over the nine sites with n, m in {-2, 0, 2}.
double origin_region_probability(const ProbabilityMap& pm);

/// (sum P^2)^{-1}
double participation_ratio(const ProbabilityMap& pm);

CoinDensity coin_density(const WalkerState& state);

/// Base-2 von Neumann entropy of the coin, eigenvalues clamped to [0, 1].
double entanglement_entropy(const CoinDensity& rho);

/// Single pass over the support computing every ObservableRecord field
/// without materializing a ProbabilityMap.
ObservableRecord measure(const WalkerState& state);

}  // namespace qwalk
