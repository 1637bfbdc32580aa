#pragma once

#include <complex>
#include <functional>
#include <vector>

#include "gms/measure.hpp"
#include "gms/pw_map.hpp"

namespace gms {

// Midpoint samples of a function on [0, 1]; complex-valued since the weighted
// composition operators produce complex output for s != 0.
struct GridFunction {
  int n = 0;
  std::vector<std::complex<double>> values;
  double p = 2.0;

  static GridFunction sample(int n, const std::function<std::complex<double>(double)>& f,
                             double p = 2.0);
  static GridFunction constant(int n, std::complex<double> c, double p = 2.0);

  double midpoint(int i) const { return (i + 0.5) / n; }
  // Piecewise-constant read-back at an arbitrary point.
  std::complex<double> at(double y) const;
};

double lp_norm(const GridFunction& f, double p);
double lp_diff_norm(const GridFunction& f, const GridFunction& g, double p);

// T f(x) = f(g(x)) g'(x)^{1/p + i s}, evaluated on f's grid.
GridFunction operator_apply(const PwMap& g, const GridFunction& f, double p, double s);

double isometry_defect(const PwMap& g, const GridFunction& f, double p, double s);

struct GmsMetricConfig {
  int depth = 6;  // dyadic partition levels 1..depth
  StripGrid strip = StripGrid::standard();
  std::size_t law_compact_atoms = 4096;
};

// Sum over partition levels (weight 2^-n) of entry-wise characteristic
// function distances between the partition matrices of g and h.
double gms_distance(const PwMap& g, const PwMap& h, const GmsMetricConfig& cfg);

struct MatrixElement {
  std::complex<double> via_law;   // characteristic function of the derivative law
  std::complex<double> via_grid;  // composite midpoint quadrature over A and g^-1(B)
  double disagreement = 0.0;
};

MatrixElement matrix_element(const PwMap& g, const IntervalSet& A, const IntervalSet& B, double p,
                             double s, int grid_n = 1 << 16);

struct OscillationRow {
  int j;
  double matrix_element_error;  // max over dyadic pairs of |ME - mu(A cap B)| at p = 1
  double t1_norm_defect;        // L1 distance between the operator image of 1 and 1
  double gms_to_identity;
};

// Rows for j = 1, 2, 4, ..., <= j_max.
std::vector<OscillationRow> weak_not_strong_demo(int j_max, const GmsMetricConfig& cfg,
                                                 int grid_n = 1 << 16);

struct DoublingRow {
  int n;
  double sup_to_doubling;   // sup |g_n(x) - (2x mod 1)|
  double operator_gap;      // || T(g_n) f - R f ||_p
  bool measure_preserving;
};

std::vector<DoublingRow> doubling_closure_demo(int n_max, const GridFunction& f, double p);

}  // namespace gms
