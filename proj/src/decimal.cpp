#include "hcsim/decimal.hpp"

#include <cmath>
#include <stdexcept>

namespace hcsim {

namespace {

std::int64_t pow10_i64(int n) {
  std::int64_t v = 1;
  for (int i = 0; i < n; ++i) {
    if (v > INT64_MAX / 10) throw std::overflow_error("decimal scale overflow");
    v *= 10;
  }
  return v;
}

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  const __int128 wide = static_cast<__int128>(a) * b;
  if (wide > INT64_MAX || wide < INT64_MIN) throw std::overflow_error("decimal mantissa overflow");
  return static_cast<std::int64_t>(wide);
}

}  // namespace

Decimal::Decimal(std::int64_t mantissa, int scale) : mantissa_(mantissa), scale_(scale) {
  if (scale < 0 || scale > 18) throw std::invalid_argument("decimal scale out of range");
}

Decimal Decimal::parse(const std::string& text) {
  if (text.empty()) throw std::invalid_argument("empty decimal");
  std::size_t i = 0;
  bool negative = false;
  if (text[i] == '+' || text[i] == '-') {
    negative = text[i] == '-';
    ++i;
  }
  std::int64_t mantissa = 0;
  int scale = 0;
  bool seen_digit = false;
  bool seen_dot = false;
  for (; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '.') {
      if (seen_dot) throw std::invalid_argument("malformed decimal: " + text);
      seen_dot = true;
      continue;
    }
    if (c < '0' || c > '9') throw std::invalid_argument("malformed decimal: " + text);
    mantissa = checked_mul(mantissa, 10) + (c - '0');
    if (seen_dot) ++scale;
    seen_digit = true;
  }
  if (!seen_digit) throw std::invalid_argument("malformed decimal: " + text);
  return Decimal(negative ? -mantissa : mantissa, scale);
}

Decimal Decimal::operator*(const Decimal& rhs) const {
  return Decimal(checked_mul(mantissa_, rhs.mantissa_), scale_ + rhs.scale_);
}

Decimal Decimal::operator+(const Decimal& rhs) const {
  const int scale = std::max(scale_, rhs.scale_);
  const std::int64_t a = checked_mul(mantissa_, pow10_i64(scale - scale_));
  const std::int64_t b = checked_mul(rhs.mantissa_, pow10_i64(scale - rhs.scale_));
  if ((b > 0 && a > INT64_MAX - b) || (b < 0 && a < INT64_MIN - b)) {
    throw std::overflow_error("decimal add overflow");
  }
  return Decimal(a + b, scale);
}

bool Decimal::operator==(const Decimal& rhs) const {
  const int scale = std::max(scale_, rhs.scale_);
  return checked_mul(mantissa_, pow10_i64(scale - scale_)) ==
         checked_mul(rhs.mantissa_, pow10_i64(scale - rhs.scale_));
}

Decimal Decimal::truncate(int new_scale) const {
  if (new_scale >= scale_) {
    return Decimal(checked_mul(mantissa_, pow10_i64(new_scale - scale_)), new_scale);
  }
  // int64 division truncates toward zero, which is the rule we want.
  return Decimal(mantissa_ / pow10_i64(scale_ - new_scale), new_scale);
}

std::string Decimal::to_string() const {
  const bool negative = mantissa_ < 0;
  unsigned long long magnitude =
      negative ? -static_cast<unsigned long long>(mantissa_) : static_cast<unsigned long long>(mantissa_);
  std::string digits = std::to_string(magnitude);
  if (static_cast<int>(digits.size()) <= scale_) {
    digits.insert(0, scale_ - digits.size() + 1, '0');
  }
  std::string out;
  if (negative) out += '-';
  out += digits.substr(0, digits.size() - scale_);
  if (scale_ > 0) {
    out += '.';
    out += digits.substr(digits.size() - scale_);
  }
  return out;
}

std::string Decimal::to_trimmed_string() const {
  std::string s = to_string();
  if (s.find('.') == std::string::npos) return s;
  while (s.back() == '0') s.pop_back();
  if (s.back() == '.') s.pop_back();
  return s;
}

double Decimal::to_double() const {
  return static_cast<double>(mantissa_) / std::pow(10.0, scale_);
}

}  // namespace hcsim
