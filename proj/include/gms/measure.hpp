#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gms/errors.hpp"
#include "gms/polynomial.hpp"
#include "gms/scalar.hpp"

namespace gms {

// Half-open value interval (lo, hi] on the positive axis; hi may be +inf.
struct ValueInterval {
  Scalar lo{0};
  Scalar hi{0};
  bool unbounded = false;

  static ValueInterval bounded(Scalar lo, Scalar hi) { return {lo, hi, false}; }
  static ValueInterval above(Scalar lo) { return {lo, Scalar(0), true}; }
  bool contains(double t) const { return t > lo.value() && (unbounded || t <= hi.value()); }
  bool empty() const { return !unbounded && hi.value() <= lo.value(); }
};

struct Atom {
  Scalar t;     // location, > 0
  Scalar mass;  // >= 0
};

// Density piece supported on (lo, hi] with polynomial density.
struct DensityPiece {
  Scalar lo;
  Scalar hi;
  Polynomial density;
};

// Finite positive measure on (0, inf): atoms plus piecewise-polynomial
// density.  The class is closed under restriction, addition, scaling and
// t-weighting, and mass / first moment evaluate in closed form (exactly, when
// the inputs carry rational tags).
class RMeasure {
 public:
  static constexpr int kMaxBaseDegree = 4;  // t-weighting may push to 5

  RMeasure() = default;
  RMeasure(std::vector<Atom> atoms, std::vector<DensityPiece> pieces);

  static RMeasure point_mass(Scalar t, Scalar mass = Scalar(1));
  // Density 1 on (lo, hi].
  static RMeasure uniform(Scalar lo, Scalar hi);
  static RMeasure from_density(Scalar lo, Scalar hi, Polynomial density);

  const std::vector<Atom>& atoms() const { return atoms_; }
  const std::vector<DensityPiece>& pieces() const { return pieces_; }
  bool is_zero() const { return atoms_.empty() && pieces_.empty(); }
  bool is_continuous() const { return atoms_.empty(); }
  bool is_atomic() const { return pieces_.empty(); }

  Scalar mass() const;
  Scalar moment() const;

  RMeasure restricted(const ValueInterval& window) const;
  RMeasure scaled(const Scalar& c) const;
  RMeasure t_weighted() const;
  friend RMeasure operator+(const RMeasure& a, const RMeasure& b);

  // (continuous part, discrete part)
  std::pair<RMeasure, RMeasure> decomposed() const;

  // F(y) = nu((0, y]).
  double cdf(double y) const;
  // Right-continuous generalized inverse of the cdf; flats of the quantile
  // cover atoms, jumps skip support gaps.  Requires 0 <= z < mass().
  double quantile(double z) const;
  // Same walk with exact arithmetic where the cut lands in a constant-density
  // piece; degree >= 1 pieces fall back to a double root solve.
  Scalar quantile_cut(const Scalar& z) const;

  // Sub-measure carved out by the quantile window [q0, q1).
  RMeasure quantile_slice(const Scalar& q0, const Scalar& q1) const;

  // chi(z) = int t^z dnu, closed form; valid on the strip 0 <= Re z <= 1.
  std::complex<double> char_fn(std::complex<double> z) const;

  std::optional<std::pair<double, double>> support_bounds() const;

  // Rebins the atom list (preserving per-bin mass and moment) when it has
  // grown past max_atoms; density pieces are left alone.
  RMeasure compacted(std::size_t max_atoms) const;

  // Throws ValidationError if the difference has a negative part beyond tol.
  RMeasure minus(const RMeasure& other, double tol = 1e-12) const;

  double cdf_sup_distance(const RMeasure& other, int grid_points = 512) const;
  bool same_atoms(const RMeasure& other, double mass_tol) const;

 private:
  std::vector<Atom> atoms_;          // sorted by location, distinct, mass > 0
  std::vector<DensityPiece> pieces_; // sorted, disjoint interiors
};

// Evaluation grid on the strip 0 <= Re z <= 1: the Re z = 0 line sees the
// measure itself, the Re z = 1 line sees its t-weighting.
struct StripGrid {
  std::vector<double> re;
  std::vector<double> im;

  static StripGrid standard(double im_max = 5.0, double im_step = 0.5);
  void validate() const;
  std::vector<std::complex<double>> points() const;
};

// Pseudometric: max over the grid of |chi_a - chi_b|.
double measure_distance(const RMeasure& a, const RMeasure& b, const StripGrid& grid);

// Bins ((j-1) 2^-level, j 2^-level] partitioning (0, inf).
struct ValueBinGrid {
  int level = 1;
  double width() const { return std::ldexp(1.0, -level); }
};

// One atom per nonempty bin, placed at the bin barycenter, so per-bin mass
// and per-bin moment are both preserved.
RMeasure bin_discretize(const RMeasure& nu, const ValueBinGrid& grid);

// Index j of the bin ((j-1) 2^-level, j 2^-level] containing t; exact for
// rational-tagged scalars.
std::int64_t value_bin_index(const Scalar& t, int level);

// mass == 1 and moment == 1 within tol; returns the two residuals otherwise.
struct NormalizationResiduals {
  double mass_residual;
  double moment_residual;
  bool ok;
};
NormalizationResiduals check_normalized(const RMeasure& nu, double tol = 1e-10);

}  // namespace gms
