#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <utility>
#include <variant>
#include <vector>

#include "gms/measure.hpp"

namespace gms {

// Finite union of disjoint half-open subintervals [a, b) of [0, 1].
class IntervalSet {
 public:
  IntervalSet() = default;
  explicit IntervalSet(std::vector<std::pair<Scalar, Scalar>> parts);

  static IntervalSet whole();
  static IntervalSet single(Scalar a, Scalar b);
  // Cell [k 2^-level, (k+1) 2^-level).
  static IntervalSet dyadic_cell(int level, int k);

  const std::vector<std::pair<Scalar, Scalar>>& parts() const { return parts_; }
  bool empty() const { return parts_.empty(); }
  Scalar measure() const;
  IntervalSet intersect(const IntervalSet& other) const;
  bool contains(double x) const;

 private:
  std::vector<std::pair<Scalar, Scalar>> parts_;  // sorted, disjoint
};

std::vector<IntervalSet> dyadic_partition(int level);

struct LinearForm {
  Scalar slope;  // > 0
};

// Derivative(x) = quantile(base, offset + (x - x0)); base is continuous, so
// the derivative is nondecreasing and the segment convex.
struct QuantileForm {
  RMeasure base;
  Scalar offset;
};

// Fallback for maps leaving the closed form class (inverses of quantile
// segments, quantile-after-quantile compositions, analytic demo maps).
// Callables take and return absolute coordinates.
struct SampledForm {
  std::function<double(double)> value;
  std::function<double(double)> slope;
  std::vector<double> slope_breaks;  // interior monotonicity changes of the slope
  int min_law_samples = 4096;        // resolution hint for derivative-law binning
};

using SegmentForm = std::variant<LinearForm, QuantileForm, SampledForm>;

struct Segment {
  Scalar x0, x1;  // domain [x0, x1)
  Scalar y0, y1;  // image [y0, y1)
  SegmentForm form;

  bool numeric() const { return std::holds_alternative<SampledForm>(form); }
};

// Strictly increasing a.e.-bijection of [0, 1] built from ordered segments.
// Domains tile [0, 1] in order; images tile [0, 1] in any order (so interval
// exchanges and other rearrangements are representable).
class PwMap {
 public:
  explicit PwMap(std::vector<Segment> segments, double consistency_tol = 1e-12);

  static PwMap identity();

  const std::vector<Segment>& segments() const { return segs_; }
  bool exact_class() const;

  double evaluate(double x) const;
  Scalar evaluate_scalar(const Scalar& x) const;
  double derivative(double x) const;

  PwMap inverted() const;

  const Segment& segment_at(double x) const;

 private:
  std::vector<Segment> segs_;
};

// outer after inner.
PwMap compose(const PwMap& outer, const PwMap& inner);

// Derivative law of one segment over [c, d) inside its domain.
RMeasure segment_interval_law(const Segment& s, const Scalar& c, const Scalar& d);

// Segment value at x, exact where the form allows it.
Scalar segment_value(const Segment& s, const Scalar& x);

// x in [x0, x1] with segment value y (clamped into the segment's image).
Scalar segment_preimage(const Segment& s, const Scalar& y);

// Components of A, intersected with the segment's domain and the preimage of B.
std::vector<std::pair<Scalar, Scalar>> segment_region(const Segment& s, const IntervalSet& A,
                                                      const IntervalSet& B);

// Distribution of the derivative of g on A intersected with g^-1(B).
RMeasure rn_distribution(const PwMap& g, const IntervalSet& A, const IntervalSet& B);

// Lebesgue measure of g(A).
Scalar image_measure(const PwMap& g, const IntervalSet& A);

struct DistributionMatrix {
  std::vector<IntervalSet> cells;
  std::vector<std::vector<RMeasure>> entries;  // entries[row][col]

  // Row mass sums match cell measures, column moment sums match cell
  // measures; throws ValidationError beyond tol.
  void check_constraints(double tol = 1e-12) const;
};

DistributionMatrix distribution_matrix(const PwMap& g, const std::vector<IntervalSet>& partition);

// The unique convex map fixing 0 and 1 whose derivative has distribution nu;
// requires mass(nu) == moment(nu) == 1 within tol.
PwMap convex_section(const RMeasure& nu, double tol = 1e-10);

PwMap random_interval_exchange(std::uint64_t seed, int n_pieces);
bool is_measure_preserving(const PwMap& g);

// x + sin(2 pi j x) / (2 pi j): slope 1 + cos(2 pi j x).
PwMap oscillation_map(int j);

// Interval exchange on 2^n dyadic blocks translating block k to 2k mod
// (2^n - fixup); uniformly within 2^-n of x -> 2x mod 1.
PwMap doubling_exchange(int n);

// Largest pointwise gap over a sample grid.  Probing breakpoints is right
// for continuous comparisons (roundtrips against the identity); for two
// rearranging maps that only agree almost everywhere, jump locations differ
// at rounding level, so compare at cell midpoints instead.
double sup_distance(const PwMap& g, const PwMap& h, int samples = 4096,
                    bool probe_breakpoints = true);

}  // namespace gms
