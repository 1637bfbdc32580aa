#pragma once

#include <vector>

#include "gms/cosets.hpp"
#include "gms/measure.hpp"
#include "gms/pw_map.hpp"

namespace gms {

// Value-axis partition with cut points a_k = k 2^-n / (1 - k 2^-n): blocks
// shrink on every bounded range while covering all of (0, inf).
struct SplitPartition {
  int level = 1;
  std::vector<Scalar> cuts;  // a_1 .. a_{2^n - 1}, exact rationals

  int block_count() const { return 1 << level; }
  // Block k (0-based): (a_k, a_{k+1}] with a_0 = 0; the last block is (a_max, inf).
  ValueInterval block(int k) const;
};

SplitPartition split_points(int n);

// One component of a block map: a line of the model space (or the product
// component) with the derivative law the map induces on every block.  Each
// block is sent to itself, so the law list fully describes the map data.
struct BlockComponent {
  bool product = false;
  bool lumped = false;        // several tail lines folded together
  RMeasure target;            // the identity map's component measure
  std::vector<RMeasure> laws; // one law per block, law mass = block mass
};

struct BlockMap {
  SplitPartition part;
  std::vector<BlockComponent> components;

  // Total law mass == 1 and total law moment == 1 within tol.
  void check_conservation(double tol = 1e-10) const;
};

// Sub-interval B of block C with nu(B) == nu1(C) and (t nu)(B) == (t nu1)(C);
// outer bisection over the window position, inner cdf inversion.
ValueInterval find_Bk(const RMeasure& nu, const RMeasure& nu1, const ValueInterval& C,
                      double tol = 1e-10);

// Splits one line carrying nu = nu1 + nu2 into two lines; block k of line 1
// carries nu restricted to B_k, line 2 the complement within the block.
BlockMap splitting_theta(const RMeasure& nu, const RMeasure& nu1, const RMeasure& nu2, int n);

// Spreads one line over the product component; block k carries nu there.
BlockMap spreading_upsilon(const RMeasure& nu, int n);

// Stage-k approximant of the identity of the target label's model space:
// the first min(k, K) lines are carved by two-moment matching, remaining
// lines are lumped into one tail component, the atomic/product part takes
// the leftover slice.  Block resolution n = k + 2 unless overridden.
BlockMap closure_composer(const RMeasure& nu, const CanonicalLabel& target, int k,
                          int n_override = -1);

// Distance of a block map to the identity of its target label: summed over
// split levels 1..n+1 (weight 2^-m) of per-block characteristic function
// gaps, the level n+1 blocks using the law with block-decoupled positions.
double blockmap_distance(const BlockMap& bm, const StripGrid& strip);

// Per-block diagnostics for reports.
struct BlockRow {
  int block;
  int component;
  double mass_residual;   // law mass - target block mass
  double support_lo;
  double support_hi;
  double block_distance;  // characteristic gap of the block law vs target
};
std::vector<BlockRow> blockmap_rows(const BlockMap& bm, const StripGrid& strip);

// Piecewise-linear approximant whose derivative on the preimage of every
// value bin is the bin barycenter of the derivative law; preserves the
// per-bin domain blocks and their images.
PwMap discretize_gms(const PwMap& g, int bins_level);

}  // namespace gms
