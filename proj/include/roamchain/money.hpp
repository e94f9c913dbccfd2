#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace roamchain {

namespace detail {
__extension__ using i128 = __int128;
constexpr std::int64_t pow10(int n) { return n == 0 ? 1 : 10 * pow10(n - 1); }
std::string format_fixed(std::int64_t minor, int decimals);
std::int64_t parse_fixed(std::string_view text, int decimals);
std::int64_t round_div(i128 num, i128 den);
}  // namespace detail

/// Signed fixed-point amount with `Decimals` fractional digits. Tag keeps
/// fiat and crypto amounts from mixing.
template <int Decimals, class Tag>
class FixedPoint {
 public:
  static constexpr int kDecimals = Decimals;
  static constexpr std::int64_t kScale = detail::pow10(Decimals);

  constexpr FixedPoint() = default;

  static constexpr FixedPoint from_minor(std::int64_t minor) { return FixedPoint(minor); }
  static FixedPoint from_double(double value) {
    return FixedPoint(std::llround(value * static_cast<double>(kScale)));
  }
  /// Exact decimal parse, e.g. "0.25". Rejects more than Decimals digits.
  static FixedPoint parse(std::string_view text) { return FixedPoint(detail::parse_fixed(text, Decimals)); }

  constexpr std::int64_t minor() const { return minor_; }
  double to_double() const { return static_cast<double>(minor_) / static_cast<double>(kScale); }
  std::string str() const { return detail::format_fixed(minor_, Decimals); }

  constexpr FixedPoint operator+(FixedPoint o) const { return FixedPoint(minor_ + o.minor_); }
  constexpr FixedPoint operator-(FixedPoint o) const { return FixedPoint(minor_ - o.minor_); }
  constexpr FixedPoint operator-() const { return FixedPoint(-minor_); }
  constexpr FixedPoint& operator+=(FixedPoint o) { minor_ += o.minor_; return *this; }
  constexpr FixedPoint& operator-=(FixedPoint o) { minor_ -= o.minor_; return *this; }
  constexpr FixedPoint operator*(std::int64_t k) const { return FixedPoint(minor_ * k); }

  constexpr auto operator<=>(const FixedPoint&) const = default;

 private:
  constexpr explicit FixedPoint(std::int64_t minor) : minor_(minor) {}
  std::int64_t minor_ = 0;
};

struct FiatTag {};
struct CryptoTag {};
struct RateTag {};

using Fiat = FixedPoint<4, FiatTag>;
using Crypto = FixedPoint<8, CryptoTag>;

/// Fiat per cryptocurrency unit; strictly positive.
class ConversionRate {
 public:
  using Value = FixedPoint<8, RateTag>;

  explicit ConversionRate(Value fiat_per_crypto);
  static ConversionRate parse(std::string_view text) { return ConversionRate(Value::parse(text)); }
  static ConversionRate from_double(double v) { return ConversionRate(Value::from_double(v)); }

  Value value() const { return value_; }
  bool operator==(const ConversionRate&) const = default;

 private:
  Value value_;
};

/// amount * rate, rounded half away from zero to the fiat minor unit.
Fiat convert_price(Crypto amount, ConversionRate rate);
/// amount / rate, rounded half away from zero to the crypto minor unit.
Crypto convert_to_crypto(Fiat amount, ConversionRate rate);

}  // namespace roamchain
