#pragma once

#include <cstdint>
#include <string>

namespace hcsim {

// Exact base-10 fixed point: value = mantissa / 10^scale.
//
// The gas -> ether -> USD pipeline must reproduce published cost cells as
// decimal strings, which binary floating point cannot guarantee, so all
// monetary math runs on these scaled integers.
class Decimal {
 public:
  Decimal() = default;
  Decimal(std::int64_t mantissa, int scale);

  static Decimal parse(const std::string& text);
  static Decimal from_int(std::int64_t v) { return Decimal(v, 0); }

  Decimal operator*(const Decimal& rhs) const;
  Decimal operator+(const Decimal& rhs) const;
  bool operator==(const Decimal& rhs) const;

  // Drops fractional digits beyond new_scale, truncating toward zero.
  Decimal truncate(int new_scale) const;

  // Fixed form with exactly scale() fractional digits ("0.00069").
  std::string to_string() const;
  // Same with trailing fractional zeros (and a bare '.') removed.
  std::string to_trimmed_string() const;

  std::int64_t mantissa() const { return mantissa_; }
  int scale() const { return scale_; }
  double to_double() const;

 private:
  std::int64_t mantissa_ = 0;
  int scale_ = 0;
};

}  // namespace hcsim
