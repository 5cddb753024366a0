#include "drugmcts/bitvector.hpp"

#include <bit>

#include "drugmcts/error.hpp"

namespace drugmcts {

namespace {

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

BitVector::BitVector(std::size_t n_bits) : n_bits_(n_bits), words_((n_bits + 63) / 64, 0) {}

BitVector::BitVector(std::size_t n_bits, std::initializer_list<std::size_t> set_bits)
    : BitVector(n_bits) {
  for (auto b : set_bits) set(b);
}

BitVector BitVector::from_hex(std::string_view hex, std::size_t n_bits) {
  const std::size_t digits = (n_bits + 3) / 4;
  if (hex.size() != digits) {
    throw Error("fingerprint hex has " + std::to_string(hex.size()) + " digits, expected " +
                std::to_string(digits) + " for n_bits=" + std::to_string(n_bits));
  }
  BitVector out(n_bits);
  for (std::size_t i = 0; i < digits; ++i) {
    const char c = hex[i];
    if (c >= 'A' && c <= 'F') throw Error("fingerprint hex must be lowercase");
    const int v = hex_value(c);
    if (v < 0) throw Error(std::string("invalid hex digit '") + c + "' in fingerprint");
    const std::size_t nibble = digits - 1 - i;
    for (int b = 0; b < 4; ++b) {
      if (!(v & (1 << b))) continue;
      const std::size_t bit = nibble * 4 + static_cast<std::size_t>(b);
      if (bit >= n_bits) throw Error("fingerprint sets padding bit beyond n_bits");
      out.set(bit);
    }
  }
  return out;
}

std::string BitVector::to_hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  const std::size_t digits = (n_bits_ + 3) / 4;
  std::string out(digits, '0');
  for (std::size_t nibble = 0; nibble < digits; ++nibble) {
    const std::size_t word = (nibble * 4) / 64;
    const std::size_t shift = (nibble * 4) % 64;
    const auto v = static_cast<unsigned>((words_[word] >> shift) & 0xFu);
    out[digits - 1 - nibble] = kDigits[v];
  }
  return out;
}

bool BitVector::test(std::size_t bit) const {
  if (bit >= n_bits_) throw std::out_of_range("bit index out of range");
  return (words_[bit / 64] >> (bit % 64)) & 1u;
}

void BitVector::set(std::size_t bit, bool value) {
  if (bit >= n_bits_) throw std::out_of_range("bit index out of range");
  const std::uint64_t mask = std::uint64_t{1} << (bit % 64);
  if (value) {
    words_[bit / 64] |= mask;
  } else {
    words_[bit / 64] &= ~mask;
  }
}

std::size_t BitVector::count() const noexcept {
  std::size_t n = 0;
  for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

std::size_t BitVector::intersection_count(const BitVector& other) const noexcept {
  std::size_t n = 0;
  for (std::size_t i = 0; i < words_.size() && i < other.words_.size(); ++i) {
    n += static_cast<std::size_t>(std::popcount(words_[i] & other.words_[i]));
  }
  return n;
}

std::size_t BitVector::union_count(const BitVector& other) const noexcept {
  std::size_t n = 0;
  for (std::size_t i = 0; i < words_.size() && i < other.words_.size(); ++i) {
    n += static_cast<std::size_t>(std::popcount(words_[i] | other.words_[i]));
  }
  return n;
}

}  // namespace drugmcts
