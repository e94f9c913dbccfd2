#include "roamchain/bytes.hpp"

#include <openssl/evp.h>

#include <algorithm>

namespace roamchain {

namespace {

constexpr char kHexDigits[] = "0123456789abcdef";

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

// Explicit fetch once; EVP_sha256() does an implicit provider lookup per call on OpenSSL 3.
const EVP_MD* sha256_md() {
  static const EVP_MD* md = [] {
    const EVP_MD* fetched = EVP_MD_fetch(nullptr, "SHA256", nullptr);
    return fetched != nullptr ? fetched : EVP_sha256();
  }();
  return md;
}

}  // namespace

bool Digest::is_zero() const {
  return std::all_of(bytes.begin(), bytes.end(), [](auto b) { return b == 0; });
}

std::string Digest::hex() const { return to_hex(bytes); }

Digest Digest::from_hex(std::string_view hex) {
  auto raw = roamchain::from_hex(hex);
  if (raw.size() != 32) throw DecodeError("digest must be 32 bytes");
  Digest d;
  std::copy(raw.begin(), raw.end(), d.bytes.begin());
  return d;
}

Digest sha256(ByteView data) {
  Digest d;
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), d.bytes.data(), &len, sha256_md(), nullptr) != 1 ||
      len != d.bytes.size()) {
    throw std::runtime_error("sha256 failed");
  }
  return d;
}

Digest sha256(std::string_view data) { return sha256(as_bytes(data)); }

std::string to_hex(ByteView data) {
  std::string out;
  out.reserve(data.size() * 2);
  for (auto b : data) {
    out.push_back(kHexDigits[b >> 4]);
    out.push_back(kHexDigits[b & 0x0f]);
  }
  return out;
}

Bytes from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) throw DecodeError("odd-length hex string");
  Bytes out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    int hi = hex_value(hex[2 * i]);
    int lo = hex_value(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) throw DecodeError("invalid hex digit");
    out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
  }
  return out;
}

Writer& Writer::u8(std::uint8_t v) {
  out_.push_back(v);
  return *this;
}

Writer& Writer::u32(std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) out_.push_back(static_cast<std::uint8_t>(v >> shift));
  return *this;
}

Writer& Writer::u64(std::uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8) out_.push_back(static_cast<std::uint8_t>(v >> shift));
  return *this;
}

Writer& Writer::bytes(ByteView v) {
  if (v.size() > UINT32_MAX) throw std::length_error("field too long for u32 length prefix");
  u32(static_cast<std::uint32_t>(v.size()));
  out_.insert(out_.end(), v.begin(), v.end());
  return *this;
}

Writer& Writer::str(std::string_view v) { return bytes(as_bytes(v)); }

Writer& Writer::digest(const Digest& d) {
  out_.insert(out_.end(), d.bytes.begin(), d.bytes.end());
  return *this;
}

ByteView Reader::take(std::size_t n) {
  if (in_.size() - pos_ < n) throw DecodeError("unexpected end of input");
  auto view = in_.subspan(pos_, n);
  pos_ += n;
  return view;
}

std::uint8_t Reader::u8() { return take(1)[0]; }

std::uint32_t Reader::u32() {
  std::uint32_t v = 0;
  for (auto b : take(4)) v = (v << 8) | b;
  return v;
}

std::uint64_t Reader::u64() {
  std::uint64_t v = 0;
  for (auto b : take(8)) v = (v << 8) | b;
  return v;
}

Bytes Reader::bytes() {
  auto n = u32();
  auto view = take(n);
  return {view.begin(), view.end()};
}

std::string Reader::str() {
  auto n = u32();
  auto view = take(n);
  return {view.begin(), view.end()};
}

Digest Reader::digest() {
  Digest d;
  auto view = take(d.bytes.size());
  std::copy(view.begin(), view.end(), d.bytes.begin());
  return d;
}

void Reader::expect_end() const {
  if (!done()) throw DecodeError("trailing bytes after record");
}

}  // namespace roamchain
