#include "gms/topology.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace gms {

namespace {

std::complex<double> slope_power(double d, std::complex<double> z) {
  if (!(d > 0.0)) return {0.0, 0.0};  // Re z > 0 on our strip usage
  return std::exp(z * std::log(d));
}

using SparseMatrix = std::map<std::pair<int, int>, RMeasure>;

SparseMatrix partition_matrix(const PwMap& g, int level, std::size_t compact_atoms) {
  const double cells = std::ldexp(1.0, level);
  std::vector<Scalar> cuts;
  const std::int64_t den = std::int64_t(1) << level;
  for (std::int64_t k = 0; k <= den; ++k) cuts.push_back(Scalar::ratio(k, den));
  for (const auto& s : g.segments()) {
    cuts.push_back(s.x0);
    cuts.push_back(s.x1);
    for (std::int64_t m = 1; m < den; ++m) {
      const Scalar y = Scalar::ratio(m, den);
      if (y.value() > s.y0.value() + 1e-15 && y.value() < s.y1.value() - 1e-15)
        cuts.push_back(segment_preimage(s, y));
    }
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(),
                         [](const Scalar& a, const Scalar& b) { return a.value() == b.value(); }),
             cuts.end());

  SparseMatrix S;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const Scalar c = cuts[i], d = cuts[i + 1];
    if (d.value() - c.value() <= 1e-15) continue;
    const double mid = 0.5 * (c.value() + d.value());
    if (mid < 0.0 || mid >= 1.0) continue;
    const Segment& seg = g.segment_at(mid);
    const int alpha = std::min(static_cast<int>(mid * cells), (1 << level) - 1);
    const int beta =
        std::min(std::max(static_cast<int>(g.evaluate(mid) * cells), 0), (1 << level) - 1);
    RMeasure law = segment_interval_law(seg, c, d);
    auto& slot = S[{alpha, beta}];
    slot = slot + law;
  }
  for (auto& [key, law] : S) law = law.compacted(compact_atoms);
  return S;
}

SparseMatrix coarsen(const SparseMatrix& S) {
  SparseMatrix out;
  for (const auto& [key, law] : S) {
    auto& slot = out[{key.first / 2, key.second / 2}];
    slot = slot + law;
  }
  return out;
}

double level_distance(const SparseMatrix& A, const SparseMatrix& B, const StripGrid& strip,
                      std::size_t compact_atoms) {
  double d = 0.0;
  auto entry = [compact_atoms](const SparseMatrix& M,
                               const std::pair<int, int>& key) -> RMeasure {
    auto it = M.find(key);
    return it == M.end() ? RMeasure() : it->second.compacted(compact_atoms);
  };
  for (const auto& [key, law] : A) d += measure_distance(law, entry(B, key), strip);
  for (const auto& [key, law] : B) {
    if (A.find(key) == A.end()) d += measure_distance(entry(A, key), law, strip);
  }
  return d;
}

}  // namespace

GridFunction GridFunction::sample(int n, const std::function<std::complex<double>(double)>& f,
                                  double p) {
  if (n < 2) throw PreconditionError("grid functions need at least two samples");
  GridFunction g;
  g.n = n;
  g.p = p;
  g.values.resize(n);
  for (int i = 0; i < n; ++i) g.values[i] = f((i + 0.5) / n);
  return g;
}

GridFunction GridFunction::constant(int n, std::complex<double> c, double p) {
  if (n < 2) throw PreconditionError("grid functions need at least two samples");
  GridFunction g;
  g.n = n;
  g.p = p;
  g.values.assign(n, c);
  return g;
}

std::complex<double> GridFunction::at(double y) const {
  int idx = static_cast<int>(y * n);
  idx = std::min(std::max(idx, 0), n - 1);
  return values[idx];
}

double lp_norm(const GridFunction& f, double p) {
  double acc = 0.0;
  for (const auto& v : f.values) acc += std::pow(std::abs(v), p);
  return std::pow(acc / f.n, 1.0 / p);
}

double lp_diff_norm(const GridFunction& f, const GridFunction& g, double p) {
  if (f.n != g.n) throw PreconditionError("grid functions must share a grid");
  double acc = 0.0;
  for (int i = 0; i < f.n; ++i) acc += std::pow(std::abs(f.values[i] - g.values[i]), p);
  return std::pow(acc / f.n, 1.0 / p);
}

GridFunction operator_apply(const PwMap& g, const GridFunction& f, double p, double s) {
  if (!(p >= 1.0)) throw PreconditionError("operator exponent needs p >= 1");
  const std::complex<double> z(1.0 / p, s);
  GridFunction out;
  out.n = f.n;
  out.p = p;
  out.values.resize(f.n);
  for (int i = 0; i < f.n; ++i) {
    const double x = (i + 0.5) / f.n;
    const double y = g.evaluate(x);
    const double d = g.derivative(x);
    out.values[i] = f.at(y) * slope_power(d, z);
  }
  return out;
}

double isometry_defect(const PwMap& g, const GridFunction& f, double p, double s) {
  return std::fabs(lp_norm(operator_apply(g, f, p, s), p) - lp_norm(f, p));
}

double gms_distance(const PwMap& g, const PwMap& h, const GmsMetricConfig& cfg) {
  if (cfg.depth < 1) throw PreconditionError("metric needs at least one partition level");
  cfg.strip.validate();
  SparseMatrix Sg = partition_matrix(g, cfg.depth, cfg.law_compact_atoms);
  SparseMatrix Sh = partition_matrix(h, cfg.depth, cfg.law_compact_atoms);
  double total = 0.0;
  for (int n = cfg.depth; n >= 1; --n) {
    total += std::ldexp(level_distance(Sg, Sh, cfg.strip, cfg.law_compact_atoms), -n);
    if (n > 1) {
      Sg = coarsen(Sg);
      Sh = coarsen(Sh);
    }
  }
  return total;
}

MatrixElement matrix_element(const PwMap& g, const IntervalSet& A, const IntervalSet& B, double p,
                             double s, int grid_n) {
  const std::complex<double> z(1.0 / p, s);
  MatrixElement me;
  me.via_law = rn_distribution(g, A, B).char_fn(z);

  std::complex<double> quad{0.0, 0.0};
  for (const auto& seg : g.segments()) {
    for (const auto& [c, d] : segment_region(seg, A, B)) {
      const double len = d.value() - c.value();
      if (len <= 0.0) continue;
      if (const auto* lin = std::get_if<LinearForm>(&seg.form)) {
        quad += slope_power(lin->slope.value(), z) * len;
      } else {
        const int cells = std::max(1, static_cast<int>(std::ceil(len * grid_n)));
        const double w = len / cells;
        for (int k = 0; k < cells; ++k) {
          const double x = c.value() + (k + 0.5) * w;
          quad += slope_power(g.derivative(x), z) * w;
        }
      }
    }
  }
  me.via_grid = quad;
  me.disagreement = std::abs(me.via_law - me.via_grid);
  return me;
}

std::vector<OscillationRow> weak_not_strong_demo(int j_max, const GmsMetricConfig& cfg,
                                                 int grid_n) {
  if (j_max < 1) throw PreconditionError("oscillation demo needs j_max >= 1");
  const PwMap id = PwMap::identity();
  const auto cells = dyadic_partition(3);
  std::vector<OscillationRow> rows;
  for (int j = 1; j <= j_max; j *= 2) {
    const PwMap g = oscillation_map(j);
    OscillationRow row{};
    row.j = j;

    double worst = 0.0;
    for (const auto& A : cells) {
      for (const auto& B : cells) {
        const double me = rn_distribution(g, A, B).moment().value();
        const double overlap = A.intersect(B).measure().value();
        worst = std::max(worst, std::fabs(me - overlap));
      }
    }
    row.matrix_element_error = worst;

    const int t1_n = std::max(grid_n * 4, 1 << 18);
    double acc = 0.0;
    for (int i = 0; i < t1_n; ++i) acc += std::fabs(g.derivative((i + 0.5) / t1_n) - 1.0);
    row.t1_norm_defect = acc / t1_n;

    row.gms_to_identity = gms_distance(g, id, cfg);
    rows.push_back(row);
  }
  return rows;
}

std::vector<DoublingRow> doubling_closure_demo(int n_max, const GridFunction& f, double p) {
  if (n_max < 1) throw PreconditionError("doubling demo needs n_max >= 1");
  GridFunction rf;
  rf.n = f.n;
  rf.p = f.p;
  rf.values.resize(f.n);
  for (int i = 0; i < f.n; ++i) {
    const double x = (i + 0.5) / f.n;
    const double y = 2.0 * x < 1.0 ? 2.0 * x : 2.0 * x - 1.0;
    rf.values[i] = f.at(y);
  }
  std::vector<DoublingRow> rows;
  for (int n = 1; n <= n_max; ++n) {
    const PwMap g = doubling_exchange(n);
    DoublingRow row{};
    row.n = n;
    double sup = 0.0;
    for (const auto& s : g.segments()) {
      // The gap is linear within a block, so probing just inside both block
      // ends bounds the sup while keeping one-sided limits consistent.
      for (double x : {std::nextafter(s.x0.value(), 1.0), std::nextafter(s.x1.value(), 0.0)}) {
        const double y = 2.0 * x < 1.0 ? 2.0 * x : 2.0 * x - 1.0;
        sup = std::max(sup, std::fabs(g.evaluate(x) - y));
      }
    }
    row.sup_to_doubling = sup;
    row.operator_gap = lp_diff_norm(operator_apply(g, f, p, 0.0), rf, p);
    row.measure_preserving = is_measure_preserving(g);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace gms
