#pragma once

#include <cstdint>
#include <cstdlib>
#include <numeric>
#include <optional>
#include <string>

namespace gms {

// Exact rational over int64 with overflow-checked arithmetic.  Any operation
// that would overflow returns nullopt; callers then continue in plain double.
class Rational {
 public:
  Rational() : num_(0), den_(1) {}

  static std::optional<Rational> make(std::int64_t num, std::int64_t den) {
    if (den == 0) return std::nullopt;
    if (num == INT64_MIN || den == INT64_MIN) return std::nullopt;
    if (den < 0) {
      num = -num;
      den = -den;
    }
    const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
    Rational r;
    r.num_ = num;
    r.den_ = den;
    return r;
  }

  static Rational from_int(std::int64_t n) {
    Rational r;
    r.num_ = n;
    r.den_ = 1;
    return r;
  }

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }

  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

  bool operator==(const Rational& o) const { return num_ == o.num_ && den_ == o.den_; }
  bool operator!=(const Rational& o) const { return !(*this == o); }

  // Exact order comparison via 128-bit cross products.
  int compare(const Rational& o) const {
    const __int128 lhs = static_cast<__int128>(num_) * o.den_;
    const __int128 rhs = static_cast<__int128>(o.num_) * den_;
    if (lhs < rhs) return -1;
    if (lhs > rhs) return 1;
    return 0;
  }

  static std::optional<Rational> add(const Rational& a, const Rational& b) {
    std::int64_t n1, n2, n, d;
    if (__builtin_mul_overflow(a.num_, b.den_, &n1)) return std::nullopt;
    if (__builtin_mul_overflow(b.num_, a.den_, &n2)) return std::nullopt;
    if (__builtin_add_overflow(n1, n2, &n)) return std::nullopt;
    if (__builtin_mul_overflow(a.den_, b.den_, &d)) return std::nullopt;
    return make(n, d);
  }

  static std::optional<Rational> sub(const Rational& a, const Rational& b) { return add(a, -b); }

  Rational operator-() const {
    Rational r;
    r.num_ = -num_;
    r.den_ = den_;
    return r;
  }

  static std::optional<Rational> mul(const Rational& a, const Rational& b) {
    // Cross-reduce first to keep intermediates small.
    const std::int64_t g1 = std::gcd(a.num_ < 0 ? -a.num_ : a.num_, b.den_);
    const std::int64_t g2 = std::gcd(b.num_ < 0 ? -b.num_ : b.num_, a.den_);
    const std::int64_t an = g1 > 1 ? a.num_ / g1 : a.num_;
    const std::int64_t bd = g1 > 1 ? b.den_ / g1 : b.den_;
    const std::int64_t bn = g2 > 1 ? b.num_ / g2 : b.num_;
    const std::int64_t ad = g2 > 1 ? a.den_ / g2 : a.den_;
    std::int64_t n, d;
    if (__builtin_mul_overflow(an, bn, &n)) return std::nullopt;
    if (__builtin_mul_overflow(ad, bd, &d)) return std::nullopt;
    return make(n, d);
  }

  static std::optional<Rational> div(const Rational& a, const Rational& b) {
    if (b.num_ == 0) return std::nullopt;
    Rational inv;
    inv.num_ = b.num_ < 0 ? -b.den_ : b.den_;
    inv.den_ = b.num_ < 0 ? -b.num_ : b.num_;
    return mul(a, inv);
  }

  bool is_integer() const { return den_ == 1; }

  std::string str() const {
    if (den_ == 1) return std::to_string(num_);
    return std::to_string(num_) + "/" + std::to_string(den_);
  }

 private:
  std::int64_t num_;
  std::int64_t den_;  // > 0, gcd(|num|, den) == 1
};

}  // namespace gms
