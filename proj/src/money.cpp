#include "roamchain/money.hpp"

#include <charconv>

namespace roamchain {

namespace detail {

std::string format_fixed(std::int64_t minor, int decimals) {
  const bool negative = minor < 0;
  auto magnitude = static_cast<std::uint64_t>(negative ? -(minor + 1) : minor) + (negative ? 1 : 0);
  auto scale = static_cast<std::uint64_t>(pow10(decimals));
  std::string frac = std::to_string(magnitude % scale);
  frac.insert(0, static_cast<std::size_t>(decimals) - frac.size(), '0');
  std::string out = negative ? "-" : "";
  out += std::to_string(magnitude / scale);
  if (decimals > 0) out += "." + frac;
  return out;
}

std::int64_t parse_fixed(std::string_view text, int decimals) {
  auto bad = [&] { return std::invalid_argument("invalid decimal amount '" + std::string(text) + "'"); };
  if (text.empty()) throw bad();
  bool negative = false;
  if (text.front() == '-') {
    negative = true;
    text.remove_prefix(1);
  }
  auto dot = text.find('.');
  auto int_part = text.substr(0, dot);
  std::string_view frac_part = dot == std::string_view::npos ? std::string_view{} : text.substr(dot + 1);
  if (int_part.empty() && frac_part.empty()) throw bad();
  if (static_cast<int>(frac_part.size()) > decimals) throw bad();
  std::int64_t whole = 0;
  if (!int_part.empty()) {
    auto [ptr, ec] = std::from_chars(int_part.data(), int_part.data() + int_part.size(), whole);
    if (ec != std::errc{} || ptr != int_part.data() + int_part.size()) throw bad();
  }
  std::int64_t frac = 0;
  for (char ch : frac_part) {
    if (ch < '0' || ch > '9') throw bad();
    frac = frac * 10 + (ch - '0');
  }
  frac *= pow10(decimals - static_cast<int>(frac_part.size()));
  std::int64_t minor = whole * pow10(decimals) + frac;
  return negative ? -minor : minor;
}

std::int64_t round_div(i128 num, i128 den) {
  const bool negative = (num < 0) != (den < 0);
  if (num < 0) num = -num;
  if (den < 0) den = -den;
  i128 q = (num + den / 2) / den;
  return static_cast<std::int64_t>(negative ? -q : q);
}

}  // namespace detail

ConversionRate::ConversionRate(Value fiat_per_crypto) : value_(fiat_per_crypto) {
  if (fiat_per_crypto.minor() <= 0) throw std::invalid_argument("conversion rate must be > 0");
}

Fiat convert_price(Crypto amount, ConversionRate rate) {
  constexpr detail::i128 den = detail::pow10(Crypto::kDecimals + ConversionRate::Value::kDecimals -
                                         Fiat::kDecimals);
  detail::i128 num = static_cast<detail::i128>(amount.minor()) * rate.value().minor();
  return Fiat::from_minor(detail::round_div(num, den));
}

Crypto convert_to_crypto(Fiat amount, ConversionRate rate) {
  // crypto_minor = fiat_minor * 10^(8-4) * 10^8 / rate_minor
  constexpr detail::i128 up = detail::pow10(Crypto::kDecimals - Fiat::kDecimals) *
                          static_cast<detail::i128>(detail::pow10(ConversionRate::Value::kDecimals));
  detail::i128 num = static_cast<detail::i128>(amount.minor()) * up;
  return Crypto::from_minor(detail::round_div(num, rate.value().minor()));
}

}  // namespace roamchain
