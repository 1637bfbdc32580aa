#pragma once

#include <cmath>
#include <cstdint>
#include <optional>

#include "gms/rational.hpp"

namespace gms {

// A double that remembers an exact rational form when one exists.  Arithmetic
// propagates exactness while the checked rational ops succeed and silently
// degrades to plain double afterwards.  Comparisons always go through the
// double value; use exactly_equal() where representation identity matters
// (atom merging, serialization round-trips).
class Scalar {
 public:
  Scalar() : v_(0.0), q_(Rational::from_int(0)) {}
  Scalar(double v) : v_(v) {}  // NOLINT: implicit by design
  Scalar(int v) : v_(v), q_(Rational::from_int(v)) {}
  Scalar(std::int64_t v) : v_(static_cast<double>(v)), q_(Rational::from_int(v)) {}
  explicit Scalar(const Rational& q) : v_(q.to_double()), q_(q) {}

  static Scalar ratio(std::int64_t num, std::int64_t den) {
    auto q = Rational::make(num, den);
    if (q) return Scalar(*q);
    return Scalar(static_cast<double>(num) / static_cast<double>(den));
  }

  double value() const { return v_; }
  bool is_exact() const { return q_.has_value(); }
  const std::optional<Rational>& exact() const { return q_; }

  friend Scalar operator+(const Scalar& a, const Scalar& b) {
    if (a.q_ && b.q_) {
      if (auto q = Rational::add(*a.q_, *b.q_)) return Scalar(*q);
    }
    return Scalar(a.v_ + b.v_);
  }
  friend Scalar operator-(const Scalar& a, const Scalar& b) {
    if (a.q_ && b.q_) {
      if (auto q = Rational::sub(*a.q_, *b.q_)) return Scalar(*q);
    }
    return Scalar(a.v_ - b.v_);
  }
  friend Scalar operator*(const Scalar& a, const Scalar& b) {
    if (a.q_ && b.q_) {
      if (auto q = Rational::mul(*a.q_, *b.q_)) return Scalar(*q);
    }
    return Scalar(a.v_ * b.v_);
  }
  friend Scalar operator/(const Scalar& a, const Scalar& b) {
    if (a.q_ && b.q_) {
      if (auto q = Rational::div(*a.q_, *b.q_)) return Scalar(*q);
    }
    return Scalar(a.v_ / b.v_);
  }
  Scalar operator-() const {
    if (q_) return Scalar(-*q_);
    return Scalar(-v_);
  }
  Scalar& operator+=(const Scalar& o) { return *this = *this + o; }
  Scalar& operator-=(const Scalar& o) { return *this = *this - o; }
  Scalar& operator*=(const Scalar& o) { return *this = *this * o; }
  Scalar& operator/=(const Scalar& o) { return *this = *this / o; }

  friend bool operator<(const Scalar& a, const Scalar& b) { return a.v_ < b.v_; }
  friend bool operator>(const Scalar& a, const Scalar& b) { return a.v_ > b.v_; }
  friend bool operator<=(const Scalar& a, const Scalar& b) { return a.v_ <= b.v_; }
  friend bool operator>=(const Scalar& a, const Scalar& b) { return a.v_ >= b.v_; }
  friend bool operator==(const Scalar& a, const Scalar& b) { return a.v_ == b.v_; }
  friend bool operator!=(const Scalar& a, const Scalar& b) { return a.v_ != b.v_; }

  friend bool exactly_equal(const Scalar& a, const Scalar& b) {
    if (a.q_ && b.q_) return *a.q_ == *b.q_;
    return a.v_ == b.v_;
  }

 private:
  double v_;
  std::optional<Rational> q_;
};

inline Scalar abs(const Scalar& a) { return a.value() < 0 ? -a : a; }
inline Scalar min(const Scalar& a, const Scalar& b) { return a.value() <= b.value() ? a : b; }
inline Scalar max(const Scalar& a, const Scalar& b) { return a.value() >= b.value() ? a : b; }

}  // namespace gms
