#include "qwalk/walker.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>

#include "denormals.hpp"

namespace qwalk {
namespace {

constexpr double kInvSqrt2 = 1.0 / std::numbers::sqrt2;

// Plain complex product; std::complex operator* carries NaN/inf recovery that
// blocks vectorization in the stencil loops.
inline Complex mul(Complex a, Complex b) {
  return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}

inline int parity_of(int v) { return v & 1; }

bool nonzero(const CoinPair& p) { return p.c0 != Complex{} || p.c1 != Complex{}; }

}  // namespace

BlochAngles BlochAngles::make(double theta, double phi) {
  if (!std::isfinite(theta) || !std::isfinite(phi)) {
    throw ParameterError("Bloch angles must be finite");
  }
  if (theta < 0.0 || theta > std::numbers::pi) {
    throw ParameterError("theta must lie in [0, pi]");
  }
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  double wrapped = std::fmod(phi, kTwoPi);
  if (wrapped < 0.0) wrapped += kTwoPi;
  if (wrapped >= kTwoPi) wrapped = 0.0;
  return {theta, wrapped};
}

BlochAngles BlochAngles::symmetric() { return {std::numbers::pi / 2, std::numbers::pi / 2}; }

PhaseTable::PhaseTable(const FluxRatio& alpha, int half_width)
    : half_width_(half_width), factors_(static_cast<std::size_t>(2 * half_width + 1)) {
  for (int n = -half_width; n <= half_width; ++n) {
    factors_[static_cast<std::size_t>(n + half_width)] = alpha.hop_phase(n);
  }
}

WalkerState::WalkerState(int half_width, FluxRatio alpha, int step)
    : half_width_(half_width),
      offset_(half_width / 2 + 2),
      side_(static_cast<std::size_t>(half_width) + 4),
      step_(step),
      alpha_(std::move(alpha)),
      parity_x_(parity_of(step)),
      parity_y_(parity_of(step)) {
  if (half_width < 1) throw ParameterError("lattice half-width must be at least 1");
  if (step < 0 || step > half_width) throw ParameterError("step counter must lie in [0, half-width]");
  phases_ = PhaseTable(alpha_, half_width_);
  field_.assign(side_ * side_, CoinPair{});
}

WalkerState::Range WalkerState::range(int radius, int parity) const {
  const int lo = parity_of(-radius - parity) ? -radius + 1 : -radius;
  const int hi = parity_of(radius - parity) ? radius - 1 : radius;
  if (hi < lo) return {0, -1};
  return {slot(lo, parity), slot(hi, parity)};
}

CoinPair WalkerState::at(int n, int m) const {
  if (std::abs(n) > half_width_ || std::abs(m) > half_width_) return {};
  if (parity_of(n - parity_x_) || parity_of(m - parity_y_)) return {};
  return field_[index(slot(n, parity_x_), slot(m, parity_y_))];
}

void WalkerState::set(int n, int m, CoinPair value) {
  if (std::abs(n) > half_width_ || std::abs(m) > half_width_) {
    throw std::out_of_range("site (" + std::to_string(n) + "," + std::to_string(m) + ") is off the lattice");
  }
  if (parity_of(n - parity_x_) || parity_of(m - parity_y_)) {
    if (!nonzero(value)) return;
    throw std::invalid_argument("site (" + std::to_string(n) + "," + std::to_string(m) +
                                ") is off the walker's sublattice");
  }
  field_[index(slot(n, parity_x_), slot(m, parity_y_))] = value;
  extent_x_ = std::max(extent_x_, std::abs(n));
  extent_y_ = std::max(extent_y_, std::abs(m));
}

double WalkerState::norm_squared() const {
  double total = 0.0;
  for_each_row([&](int, int, std::span<const CoinPair> sites) {
    for (const CoinPair& a : sites) total += std::norm(a.c0) + std::norm(a.c1);
  });
  return total;
}

bool WalkerState::edge_occupied_x() const {
  if (extent_x_ < half_width_) return false;
  bool occupied = false;
  for_each_row([&](int n, int, std::span<const CoinPair> sites) {
    if (std::abs(n) != half_width_) return;
    occupied = occupied || std::any_of(sites.begin(), sites.end(), nonzero);
  });
  return occupied;
}

bool WalkerState::edge_occupied_y() const {
  if (extent_y_ < half_width_) return false;
  bool occupied = false;
  for_each_row([&](int, int m_first, std::span<const CoinPair> sites) {
    const int m_last = m_first + 2 * (static_cast<int>(sites.size()) - 1);
    occupied = occupied || (m_first == -half_width_ && nonzero(sites.front())) ||
               (m_last == half_width_ && nonzero(sites.back()));
  });
  return occupied;
}

void WalkerState::clear_scratch_outside(Range rows, Range cols) {
  for (int i = scratch_rows_.first; i <= scratch_rows_.last; ++i) {
    const bool row_kept = i >= rows.first && i <= rows.last;
    for (int j = scratch_cols_.first; j <= scratch_cols_.last; ++j) {
      if (!row_kept || j < cols.first || j > cols.last) scratch_[index(i, j)] = CoinPair{};
    }
  }
}

WalkerState new_state(const BlochAngles& coin, int half_width, const FluxRatio& alpha) {
  const BlochAngles checked = BlochAngles::make(coin.theta, coin.phi);
  WalkerState state(half_width, alpha);
  state.set(0, 0, {Complex{std::cos(checked.theta / 2), 0.0},
                   std::polar(std::sin(checked.theta / 2), checked.phi)});
  return state;
}

void apply_coin(WalkerState& s) {
  const auto rows = s.range(s.extent_x_, s.parity_x_);
  const auto cols = s.range(s.extent_y_, s.parity_y_);
  for (int i = rows.first; i <= rows.last; ++i) {
    CoinPair* row = &s.field_[s.index(i, 0)];
    for (int j = cols.first; j <= cols.last; ++j) {
      const Complex a0 = row[j].c0;
      const Complex a1 = row[j].c1;
      row[j] = {(a0 + a1) * kInvSqrt2, (a0 - a1) * kInvSqrt2};
    }
  }
}

// In compact slots an x shift moves one coin component by one slot and leaves
// the other in place, depending on the new parity, so it runs in place.
void shift_x(WalkerState& s) {
  if (s.edge_occupied_x()) throw BoundaryError("x shift would carry amplitude off the lattice", s.step_ + 1);
  const int parity = 1 - s.parity_x_;
  const int extent = std::min(s.extent_x_ + 1, s.half_width_);
  const auto rows = s.range(extent, parity);
  const auto cols = s.range(s.extent_y_, s.parity_y_);
  if (parity == 1) {
    for (int i = rows.first; i <= rows.last; ++i) {
      for (int j = cols.first; j <= cols.last; ++j) s.field_[s.index(i, j)].c0 = s.field_[s.index(i + 1, j)].c0;
    }
  } else {
    for (int i = rows.last; i >= rows.first; --i) {
      for (int j = cols.first; j <= cols.last; ++j) s.field_[s.index(i, j)].c1 = s.field_[s.index(i - 1, j)].c1;
    }
  }
  s.parity_x_ = parity;
  s.extent_x_ = extent;
}

void shift_y(WalkerState& s, const PhaseTable& phases) {
  if (phases.half_width() < s.half_width_) throw ParameterError("phase table is smaller than the lattice");
  if (s.edge_occupied_y()) throw BoundaryError("y shift would carry amplitude off the lattice", s.step_ + 1);
  const int parity = 1 - s.parity_y_;
  const int extent = std::min(s.extent_y_ + 1, s.half_width_);
  const auto rows = s.range(s.extent_x_, s.parity_x_);
  const auto cols = s.range(extent, parity);
  for (int i = rows.first; i <= rows.last; ++i) {
    const Complex down = phases[s.coordinate(i, s.parity_x_)];
    const Complex up = std::conj(down);
    CoinPair* row = &s.field_[s.index(i, 0)];
    if (parity == 1) {
      for (int j = cols.first; j <= cols.last; ++j) {
        row[j].c0 = mul(down, row[j + 1].c0);
        row[j].c1 = mul(up, row[j].c1);
      }
    } else {
      for (int j = cols.last; j >= cols.first; --j) {
        row[j].c0 = mul(down, row[j].c0);
        row[j].c1 = mul(up, row[j - 1].c1);
      }
    }
  }
  s.parity_y_ = parity;
  s.extent_y_ = extent;
}

void step(WalkerState& s) {
  const int T = s.half_width_;
  if (s.step_ >= T) {
    throw BoundaryError("step " + std::to_string(s.step_ + 1) + " exceeds lattice capacity " + std::to_string(T),
                        s.step_ + 1);
  }
  if (s.edge_occupied_x() || s.edge_occupied_y()) {
    throw BoundaryError("step " + std::to_string(s.step_ + 1) + " would carry amplitude off the lattice",
                        s.step_ + 1);
  }
  const detail::ScopedFlushDenormals ftz;
  if (s.scratch_.size() != s.field_.size()) {
    s.scratch_.assign(s.field_.size(), CoinPair{});
    s.scratch_rows_ = s.scratch_cols_ = {0, -1};
  }

  // Coin, x shift, coin, y shift collapse to
  //   c0'(n,m) =      ph(n)  / 2 [ (a0+a1)(n+1,m+1) + (a0-a1)(n-1,m+1) ]
  //   c1'(n,m) = conj(ph(n)) / 2 [ (a0+a1)(n+1,m-1) - (a0-a1)(n-1,m-1) ]
  // With output parity p, n+1 and n-1 live in input slots i+p and i+p-1.
  const int px = 1 - s.parity_x_;
  const int py = 1 - s.parity_y_;
  const int ex = std::min(s.extent_x_ + 1, T);
  const int ey = std::min(s.extent_y_ + 1, T);
  const auto rows = s.range(ex, px);
  const auto cols = s.range(ey, py);
  s.clear_scratch_outside(rows, cols);

  for (int i = rows.first; i <= rows.last; ++i) {
    const Complex ph = s.phases_[s.coordinate(i, px)];
    const Complex phc = std::conj(ph);
    const CoinPair* right = &s.field_[s.index(i + px, py)];
    const CoinPair* left = &s.field_[s.index(i + px - 1, py)];
    CoinPair* out = &s.scratch_[s.index(i, 0)];
    for (int j = cols.first; j <= cols.last; ++j) {
      // right[j] is (n+1, m+1), right[j-1] is (n+1, m-1); same for left.
      const CoinPair& ru = right[j];
      const CoinPair& lu = left[j];
      const CoinPair& rd = right[j - 1];
      const CoinPair& ld = left[j - 1];
      const Complex down = 0.5 * ((ru.c0 + ru.c1) + (lu.c0 - lu.c1));
      const Complex up = 0.5 * ((rd.c0 + rd.c1) - (ld.c0 - ld.c1));
      out[j] = {mul(ph, down), mul(phc, up)};
    }
  }

  s.scratch_rows_ = s.range(s.extent_x_, s.parity_x_);
  s.scratch_cols_ = s.range(s.extent_y_, s.parity_y_);
  std::swap(s.field_, s.scratch_);
  s.parity_x_ = px;
  s.parity_y_ = py;
  s.extent_x_ = ex;
  s.extent_y_ = ey;
  ++s.step_;
}

void evolve(WalkerState& state, int steps, const StepObserver& observer) {
  if (steps < 0) throw ParameterError("step count must be non-negative");
  if (state.step_count() + steps > state.half_width()) {
    throw BoundaryError("evolving to step " + std::to_string(state.step_count() + steps) +
                            " exceeds lattice capacity " + std::to_string(state.half_width()),
                        state.half_width() + 1);
  }
  for (int i = 0; i < steps; ++i) {
    step(state);
    if (observer) observer(state);
  }
}

std::optional<std::string> check_invariants(const WalkerState& s, double norm_tolerance) {
  const int t = s.step_count();
  if (t > s.half_width()) {
    return "step counter " + std::to_string(t) + " exceeds half-width " + std::to_string(s.half_width());
  }
  if (s.parity_x() != parity_of(t) || s.parity_y() != parity_of(t)) {
    return "sublattice parity (" + std::to_string(s.parity_x()) + "," + std::to_string(s.parity_y()) +
           ") does not match step " + std::to_string(t);
  }
  const double norm = s.norm_squared();
  if (!(std::abs(norm - 1.0) <= norm_tolerance)) return "norm drifted to " + std::to_string(norm);
  std::optional<std::string> violation;
  s.for_each_row([&](int n, int m_first, std::span<const CoinPair> sites) {
    for (std::size_t k = 0; k < sites.size() && !violation; ++k) {
      const int m = m_first + 2 * static_cast<int>(k);
      if (nonzero(sites[k]) && (std::abs(n) > t || std::abs(m) > t)) {
        violation = "amplitude outside support at (" + std::to_string(n) + "," + std::to_string(m) + ")";
      }
    }
  });
  return violation;
}

Complex inner_product(const WalkerState& a, const WalkerState& b) {
  if (a.half_width() != b.half_width()) throw ParameterError("inner product needs equal lattices");
  // Different sublattices have disjoint support.
  if (a.parity_x() != b.parity_x() || a.parity_y() != b.parity_y()) return {};
  Complex total{};
  const int T = a.half_width();
  for (int n = -T; n <= T; ++n) {
    for (int m = -T; m <= T; ++m) {
      const CoinPair x = a.at(n, m);
      const CoinPair y = b.at(n, m);
      total += std::conj(x.c0) * y.c0 + std::conj(x.c1) * y.c1;
    }
  }
  return total;
}

}  // namespace qwalk
