#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

namespace drugmcts {

/// Fixed-width fingerprint. Bit i carries weight 2^i when the vector is read
/// as an n_bits-wide unsigned integer; the hex form is that integer written
/// most-significant nibble first, zero padded to ceil(n_bits / 4) digits.
class BitVector {
 public:
  BitVector() = default;
  explicit BitVector(std::size_t n_bits);
  BitVector(std::size_t n_bits, std::initializer_list<std::size_t> set_bits);

  static BitVector from_hex(std::string_view hex, std::size_t n_bits);
  std::string to_hex() const;

  std::size_t size() const noexcept { return n_bits_; }
  bool empty() const noexcept { return n_bits_ == 0; }

  bool test(std::size_t bit) const;
  void set(std::size_t bit, bool value = true);

  std::size_t count() const noexcept;
  bool none() const noexcept { return count() == 0; }

  /// Popcount of a AND b / a OR b. Widths must match (checked by callers).
  std::size_t intersection_count(const BitVector& other) const noexcept;
  std::size_t union_count(const BitVector& other) const noexcept;

  const std::vector<std::uint64_t>& words() const noexcept { return words_; }

  friend bool operator==(const BitVector&, const BitVector&) = default;

 private:
  std::size_t n_bits_ = 0;
  std::vector<std::uint64_t> words_;
};

}  // namespace drugmcts
