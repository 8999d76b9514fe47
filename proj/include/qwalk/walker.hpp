#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qwalk/flux_ratio.hpp"

namespace qwalk {

using Complex = std::complex<double>;

/// Amplitude would leave the preallocated lattice, or the step budget is spent.
class BoundaryError : public std::runtime_error {
 public:
  BoundaryError(const std::string& what, int failing_step)
      : std::runtime_error(what), failing_step_(failing_step) {}
  /// 1-based index of the step that could not be taken.
  int failing_step() const { return failing_step_; }

 private:
  int failing_step_;
};

/// Initial coin state cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>.
struct BlochAngles {
  double theta = 0.0;
  double phi = 0.0;

  /// Validates finiteness and theta in [0, pi]; phi is wrapped into [0, 2 pi).
  static BlochAngles make(double theta, double phi);
  /// (|0> + i|1>) / sqrt(2)
  static BlochAngles symmetric();
};

/// The two coin components living on one lattice site.
struct CoinPair {
  Complex c0;
  Complex c1;
  friend bool operator==(const CoinPair&, const CoinPair&) = default;
};

/// Per-column Peierls factors e^{+i 2 pi alpha n}, n in [-T, T]. Coin-1 hops
/// use the complex conjugate.
class PhaseTable {
 public:
  PhaseTable() = default;
  PhaseTable(const FluxRatio& alpha, int half_width);

  int half_width() const { return half_width_; }
  Complex operator[](int column) const { return factors_[static_cast<std::size_t>(column + half_width_)]; }
  std::span<const Complex> factors() const { return factors_; }

 private:
  int half_width_ = 0;
  std::vector<Complex> factors_;
};

/// Full coin x position state of the walker on the lattice n, m in [-T, T].
///
/// Every operation of the walk flips the parity of n (x shift), of m (y
/// shift), or neither (coin), so all amplitude always sits on sites with
/// n = parity_x and m = parity_y (mod 2). Only those sites are stored: a
/// (T+4) x (T+4) grid per buffer, including a zero margin that keeps stencil
/// reads at |n| = T + 1 in bounds. The bounding box of possibly nonzero sites
/// is tracked per axis and only grows.
class WalkerState {
 public:
  /// All-zero state at step `step` with the sublattice parity of that step.
  WalkerState(int half_width, FluxRatio alpha, int step = 0);

  int half_width() const { return half_width_; }
  int step_count() const { return step_; }
  const FluxRatio& alpha() const { return alpha_; }
  const PhaseTable& phases() const { return phases_; }

  /// Radius of the bounding box of possibly nonzero sites along x and y.
  int extent_x() const { return extent_x_; }
  int extent_y() const { return extent_y_; }
  int parity_x() const { return parity_x_; }
  int parity_y() const { return parity_y_; }

  /// Zero for sites off the lattice or off the current sublattice.
  CoinPair at(int n, int m) const;
  /// Throws std::out_of_range off the lattice and std::invalid_argument for
  /// a nonzero value off the current sublattice.
  void set(int n, int m, CoinPair value);

  double norm_squared() const;

  /// Calls f(n, m_first, sites) for every stored row inside the bounding box;
  /// sites[k] holds the amplitudes at (n, m_first + 2k).
  template <class F>
  void for_each_row(F&& f) const {
    const Range rows = range(extent_x_, parity_x_);
    const Range cols = range(extent_y_, parity_y_);
    if (rows.empty() || cols.empty()) return;
    const auto width = static_cast<std::size_t>(cols.last - cols.first + 1);
    for (int i = rows.first; i <= rows.last; ++i) {
      f(coordinate(i, parity_x_), coordinate(cols.first, parity_y_),
        std::span<const CoinPair>(&field_[index(i, cols.first)], width));
    }
  }

 private:
  friend void apply_coin(WalkerState&);
  friend void shift_x(WalkerState&);
  friend void shift_y(WalkerState&, const PhaseTable&);
  friend void step(WalkerState&);

  // Compact slot range [first, last] along one axis.
  struct Range {
    int first;
    int last;
    bool empty() const { return last < first; }
  };

  int slot(int coord, int parity) const { return (coord - parity + 2 * offset_) / 2; }
  int coordinate(int slot, int parity) const { return 2 * slot + parity - 2 * offset_; }
  Range range(int radius, int parity) const;
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(i) * side_ + static_cast<std::size_t>(j);
  }
  bool edge_occupied_x() const;
  bool edge_occupied_y() const;
  void clear_scratch_outside(Range rows, Range cols);

  int half_width_;
  int offset_;
  std::size_t side_;
  int step_;
  FluxRatio alpha_;
  PhaseTable phases_;
  int extent_x_ = 0;
  int extent_y_ = 0;
  int parity_x_ = 0;
  int parity_y_ = 0;
  std::vector<CoinPair> field_;
  // Ping-pong partner for step(), allocated on first use. scratch_rows_ and
  // scratch_cols_ bound the slots that may still hold stale amplitudes.
  std::vector<CoinPair> scratch_;
  Range scratch_rows_{0, -1};
  Range scratch_cols_{0, -1};
};

/// Walker localized at the origin with the given coin state, t = 0.
WalkerState new_state(const BlochAngles& coin, int half_width, const FluxRatio& alpha);

/// Hadamard coin on every site.
void apply_coin(WalkerState& state);
/// Coin 0 hops to n - 1, coin 1 to n + 1. No phases along x.
void shift_x(WalkerState& state);
/// Coin 0 hops to m - 1 picking up phases[n], coin 1 hops to m + 1 picking up
/// conj(phases[n]).
void shift_y(WalkerState& state, const PhaseTable& phases);

/// One full step: coin, shift_x, coin, shift_y with the state's own flux,
/// evaluated as a single fused stencil. Increments the step counter.
void step(WalkerState& state);

using StepObserver = std::function<void(const WalkerState&)>;

/// Applies `steps` steps, calling `observer` (if set) after each one.
void evolve(WalkerState& state, int steps, const StepObserver& observer = {});

/// First violated state invariant (norm, support, parity, capacity), if any.
std::optional<std::string> check_invariants(const WalkerState& state, double norm_tolerance = 1e-9);

/// <a, b> over the whole lattice. Both states must share the same half-width.
Complex inner_product(const WalkerState& a, const WalkerState& b);

}  // namespace qwalk
