#pragma once

#include <complex>
#include <numbers>
#include <optional>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

namespace qwalk {

/// Raised for malformed or out-of-range model parameters.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Exact fraction p/q with q > 0 and gcd(p, q) == 1, not reduced modulo 1.
struct Fraction {
  std::int64_t p = 0;
  std::int64_t q = 1;
  double value() const { return static_cast<double>(p) / static_cast<double>(q); }
};

/// Parses "p/q" or a plain decimal ("0.125" -> 1/8). Returns nullopt for
/// anything that is not written as a number (named constants); throws
/// ParameterError for malformed numbers.
std::optional<Fraction> parse_fraction(std::string_view text);

/// Magnetic flux through one plaquette in units of the flux quantum.
///
/// Only the value modulo 1 affects the walk, so both representations are
/// stored reduced into [0, 1). Rationals keep their exact numerator and
/// denominator so hop phases can be evaluated as exact roots of unity.
class FluxRatio {
 public:
  struct Rational {
    std::int64_t p = 0;
    std::int64_t q = 1;
  };
  struct Irrational {
    double value = 0.0;
    std::string label;
  };

  FluxRatio() = default;

  /// p/q reduced by gcd and modulo 1. Throws ParameterError when q <= 0.
  static FluxRatio rational(std::int64_t p, std::int64_t q);
  /// Any finite real, reduced modulo 1.
  static FluxRatio irrational(double value, std::string label = {});
  /// (sqrt(5) - 1) / 2
  static FluxRatio golden();

  /// Accepts "p/q", a plain decimal ("0.125", taken as the exact rational
  /// 1/8), or a named constant: golden, inv-pi, inv-e, inv-sqrt2, inv-zeta3.
  static FluxRatio parse(std::string_view text);

  bool is_rational() const { return std::holds_alternative<Rational>(repr_); }
  const Rational& as_rational() const { return std::get<Rational>(repr_); }
  double value() const;
  std::string label() const;

  /// e^{+i 2 pi alpha n}, the factor picked up by a coin-0 hop in column n.
  std::complex<double> hop_phase(std::int64_t column) const;

  std::string to_string() const;

  friend bool operator==(const FluxRatio& a, const FluxRatio& b);

 private:
  std::variant<Rational, Irrational> repr_{Rational{}};
};

/// The named constant golden ratio conjugate, (sqrt(5) - 1) / 2.
inline constexpr double kGoldenRatio = std::numbers::phi - 1.0;

}  // namespace qwalk
