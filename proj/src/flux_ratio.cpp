#include "qwalk/flux_ratio.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

namespace qwalk {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::int64_t floor_mod(std::int64_t a, std::int64_t q) {
  const std::int64_t r = a % q;
  return r < 0 ? r + q : r;
}

std::int64_t parse_integer(std::string_view digits, std::string_view whole) {
  std::int64_t out = 0;
  const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), out);
  if (ec != std::errc{} || ptr != digits.data() + digits.size() || digits.empty()) {
    throw ParameterError("invalid flux ratio '" + std::string(whole) + "'");
  }
  return out;
}

}  // namespace

FluxRatio FluxRatio::rational(std::int64_t p, std::int64_t q) {
  if (q <= 0) throw ParameterError("flux ratio denominator must be positive");
  p = floor_mod(p, q);
  const std::int64_t g = std::gcd(p, q);  // gcd(0, q) == q
  FluxRatio out;
  out.repr_ = Rational{p / g, q / g};
  return out;
}

FluxRatio FluxRatio::irrational(double value, std::string label) {
  if (!std::isfinite(value)) throw ParameterError("flux ratio must be finite");
  double reduced = value - std::floor(value);
  if (reduced >= 1.0) reduced = 0.0;
  FluxRatio out;
  out.repr_ = Irrational{reduced, std::move(label)};
  return out;
}

FluxRatio FluxRatio::golden() { return irrational(kGoldenRatio, "golden"); }

std::optional<Fraction> parse_fraction(std::string_view text) {
  if (text.empty()) throw ParameterError("empty flux ratio");
  const auto looks_numeric = [](char c) { return (c >= '0' && c <= '9') || c == '-' || c == '+' || c == '.'; };
  if (!looks_numeric(text.front())) return std::nullopt;

  __int128 p = 0;
  __int128 q = 1;
  if (const auto slash = text.find('/'); slash != std::string_view::npos) {
    p = parse_integer(text.substr(0, slash), text);
    q = parse_integer(text.substr(slash + 1), text);
    if (q <= 0) throw ParameterError("flux ratio '" + std::string(text) + "' needs a positive denominator");
  } else {
    // Plain decimal, read as the exact rational digits / 10^k.
    std::string_view body = text;
    bool negative = false;
    if (body.front() == '-' || body.front() == '+') {
      negative = body.front() == '-';
      body.remove_prefix(1);
    }
    const auto dot = body.find('.');
    const std::string_view int_part = body.substr(0, dot);
    const std::string_view frac_part = dot == std::string_view::npos ? std::string_view{} : body.substr(dot + 1);
    if (int_part.empty() && frac_part.empty()) {
      throw ParameterError("invalid flux ratio '" + std::string(text) + "'");
    }
    if (frac_part.size() > 17) {
      throw ParameterError("flux ratio '" + std::string(text) + "' has more than 17 decimals; use p/q");
    }
    for (std::size_t i = 0; i < frac_part.size(); ++i) q *= 10;
    const std::int64_t whole = int_part.empty() ? 0 : parse_integer(int_part, text);
    const std::int64_t frac = frac_part.empty() ? 0 : parse_integer(frac_part, text);
    p = static_cast<__int128>(whole) * q + frac;
    if (negative) p = -p;
  }
  __int128 a = p < 0 ? -p : p;
  __int128 b = q;
  while (b != 0) {
    const __int128 r = a % b;
    a = b;
    b = r;
  }
  if (a > 1) {
    p /= a;
    q /= a;
  }
  constexpr auto kMax = static_cast<__int128>(std::numeric_limits<std::int64_t>::max());
  if (p > kMax || -p > kMax || q > kMax) {
    throw ParameterError("flux ratio '" + std::string(text) + "' is out of range");
  }
  return Fraction{static_cast<std::int64_t>(p), static_cast<std::int64_t>(q)};
}

FluxRatio FluxRatio::parse(std::string_view text) {
  if (text == "golden") return golden();
  if (text == "inv-pi") return irrational(std::numbers::inv_pi, "inv-pi");
  if (text == "inv-e") return irrational(1.0 / std::numbers::e, "inv-e");
  if (text == "inv-sqrt2") return irrational(1.0 / std::numbers::sqrt2, "inv-sqrt2");
  if (text == "inv-zeta3") return irrational(1.0 / 1.2020569031595942, "inv-zeta3");
  if (const auto f = parse_fraction(text)) return rational(f->p, f->q);
  throw ParameterError("unknown flux ratio '" + std::string(text) + "'");
}

double FluxRatio::value() const {
  if (const auto* r = std::get_if<Rational>(&repr_)) {
    return static_cast<double>(r->p) / static_cast<double>(r->q);
  }
  return std::get<Irrational>(repr_).value;
}

std::string FluxRatio::label() const {
  if (const auto* irr = std::get_if<Irrational>(&repr_)) return irr->label;
  return {};
}

std::complex<double> FluxRatio::hop_phase(std::int64_t column) const {
  if (const auto* r = std::get_if<Rational>(&repr_)) {
    // Exact residue (p * n mod q), then the symmetric representative in
    // (-q/2, q/2] so the angle stays small.
    const auto wide = static_cast<__int128>(r->p) * column;
    auto residue = static_cast<std::int64_t>(((wide % r->q) + r->q) % r->q);
    if (2 * static_cast<__int128>(residue) > r->q) residue -= r->q;
    if ((4 * static_cast<__int128>(residue)) % r->q == 0) {
      switch ((4 * static_cast<__int128>(residue)) / r->q) {
        case 0: return {1.0, 0.0};
        case 1: return {0.0, 1.0};
        case -1: return {0.0, -1.0};
        default: return {-1.0, 0.0};
      }
    }
    const double angle = kTwoPi * (static_cast<double>(residue) / static_cast<double>(r->q));
    return std::polar(1.0, angle);
  }
  const double alpha = std::get<Irrational>(repr_).value;
  const auto n = static_cast<double>(column);
  const double nearest = std::nearbyint(alpha * n);
  const double fractional = std::fma(alpha, n, -nearest);
  return std::polar(1.0, kTwoPi * fractional);
}

std::string FluxRatio::to_string() const {
  if (const auto* r = std::get_if<Rational>(&repr_)) {
    return std::to_string(r->p) + "/" + std::to_string(r->q);
  }
  const auto& irr = std::get<Irrational>(repr_);
  if (!irr.label.empty()) return irr.label;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", irr.value);
  return buf;
}

bool operator==(const FluxRatio& a, const FluxRatio& b) {
  if (a.is_rational() != b.is_rational()) return false;
  if (a.is_rational()) {
    return a.as_rational().p == b.as_rational().p && a.as_rational().q == b.as_rational().q;
  }
  return a.value() == b.value();
}

}  // namespace qwalk
