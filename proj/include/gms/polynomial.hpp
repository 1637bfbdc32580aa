#pragma once

#include <cstddef>
#include <vector>

#include "gms/scalar.hpp"

namespace gms {

// Dense polynomial c0 + c1 t + ... over Scalar coefficients.  Degrees stay
// small (density degree cap is 4, one more after a t-weighting).
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<Scalar> coeffs) : c_(std::move(coeffs)) { trim(); }
  static Polynomial constant(const Scalar& c) { return Polynomial({c}); }

  const std::vector<Scalar>& coeffs() const { return c_; }
  int degree() const { return static_cast<int>(c_.size()) - 1; }  // -1 for zero
  bool is_zero() const { return c_.empty(); }

  Scalar eval(const Scalar& t) const {
    Scalar acc(0);
    for (std::size_t i = c_.size(); i-- > 0;) acc = acc * t + c_[i];
    return acc;
  }
  double eval(double t) const {
    double acc = 0.0;
    for (std::size_t i = c_.size(); i-- > 0;) acc = acc * t + c_[i].value();
    return acc;
  }

  friend Polynomial operator+(const Polynomial& a, const Polynomial& b) {
    std::vector<Scalar> c(std::max(a.c_.size(), b.c_.size()), Scalar(0));
    for (std::size_t i = 0; i < a.c_.size(); ++i) c[i] += a.c_[i];
    for (std::size_t i = 0; i < b.c_.size(); ++i) c[i] += b.c_[i];
    return Polynomial(std::move(c));
  }
  friend Polynomial operator-(const Polynomial& a, const Polynomial& b) {
    std::vector<Scalar> c(std::max(a.c_.size(), b.c_.size()), Scalar(0));
    for (std::size_t i = 0; i < a.c_.size(); ++i) c[i] += a.c_[i];
    for (std::size_t i = 0; i < b.c_.size(); ++i) c[i] -= b.c_[i];
    return Polynomial(std::move(c));
  }

  Polynomial scaled(const Scalar& k) const {
    std::vector<Scalar> c(c_);
    for (auto& ci : c) ci *= k;
    return Polynomial(std::move(c));
  }

  // t * p(t)
  Polynomial times_t() const {
    if (c_.empty()) return {};
    std::vector<Scalar> c(c_.size() + 1, Scalar(0));
    for (std::size_t i = 0; i < c_.size(); ++i) c[i + 1] = c_[i];
    return Polynomial(std::move(c));
  }

  // p(t / k), used when derivative values get rescaled by a slope.
  Polynomial stretched(const Scalar& k) const {
    std::vector<Scalar> c(c_);
    Scalar pow(1);
    for (std::size_t i = 0; i < c.size(); ++i) {
      c[i] /= pow;
      pow *= k;
    }
    return Polynomial(std::move(c));
  }

  Polynomial derivative() const {
    if (c_.size() <= 1) return {};
    std::vector<Scalar> c(c_.size() - 1, Scalar(0));
    for (std::size_t i = 1; i < c_.size(); ++i) c[i - 1] = c_[i] * Scalar(static_cast<int>(i));
    return Polynomial(std::move(c));
  }

  Polynomial antiderivative() const {
    std::vector<Scalar> c(c_.size() + 1, Scalar(0));
    for (std::size_t i = 0; i < c_.size(); ++i) c[i + 1] = c_[i] / Scalar(static_cast<int>(i) + 1);
    return Polynomial(std::move(c));
  }

  // Exact definite integral over [a, b].
  Scalar integral(const Scalar& a, const Scalar& b) const {
    const Polynomial anti = antiderivative();
    return anti.eval(b) - anti.eval(a);
  }

  bool equals(const Polynomial& o, double tol) const {
    const std::size_t n = std::max(c_.size(), o.c_.size());
    for (std::size_t i = 0; i < n; ++i) {
      const double a = i < c_.size() ? c_[i].value() : 0.0;
      const double b = i < o.c_.size() ? o.c_[i].value() : 0.0;
      if (std::fabs(a - b) > tol) return false;
    }
    return true;
  }

 private:
  void trim() {
    while (!c_.empty() && c_.back().value() == 0.0 && c_.back().is_exact()) c_.pop_back();
  }

  std::vector<Scalar> c_;
};

}  // namespace gms
