#include "gms/measure.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>

namespace gms {

namespace {

constexpr double kDensityTol = 1e-12;

// Root of monotone increasing f on [lo, hi] with f(lo) <= 0 <= f(hi),
// Newton steps guarded by bisection.
double solve_increasing(const std::function<double(double)>& f,
                        const std::function<double(double)>& df, double lo, double hi) {
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double fx = f(x);
    if (fx > 0)
      hi = x;
    else
      lo = x;
    if (hi - lo < 1e-15 * std::max(1.0, std::fabs(hi))) break;
    const double d = df(x);
    double next = d > 0 ? x - fx / d : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    x = next;
  }
  return 0.5 * (lo + hi);
}

std::complex<double> cexpm1(std::complex<double> z) {
  if (std::abs(z) > 0.5) return std::exp(z) - 1.0;
  std::complex<double> term = z;
  std::complex<double> sum = z;
  for (int k = 2; k < 40; ++k) {
    term *= z / static_cast<double>(k);
    sum += term;
    if (std::abs(term) < 1e-20) break;
  }
  return sum;
}

// b^w - a^w for 0 <= a <= b, Re w > 0, stable when b/a is close to 1.
std::complex<double> pow_diff(double a, double b, std::complex<double> w) {
  if (b <= a) return {0.0, 0.0};
  if (a <= 0.0) return std::exp(w * std::log(b));
  const double r = (b - a) / a;
  if (r < 0.5) {
    return std::exp(w * std::log(a)) * cexpm1(w * std::log1p(r));
  }
  return std::exp(w * std::log(b)) - std::exp(w * std::log(a));
}

// Value cut t inside piece p such that the piece carries local_mass on
// (p.lo, t]; exact for constant densities.
Scalar piece_cdf_inverse(const DensityPiece& p, const Scalar& local_mass) {
  if (local_mass.value() <= 0.0) return p.lo;
  if (p.density.degree() == 0) {
    const Scalar t = p.lo + local_mass / p.density.coeffs()[0];
    return min(t, p.hi);
  }
  const Polynomial anti = p.density.antiderivative();
  const double base = anti.eval(p.lo.value());
  const double target = local_mass.value();
  const double full = anti.eval(p.hi.value()) - base;
  if (target >= full) return p.hi;
  const double t = solve_increasing([&](double x) { return anti.eval(x) - base - target; },
                                    [&](double x) { return p.density.eval(x); }, p.lo.value(),
                                    p.hi.value());
  return Scalar(t);
}

}  // namespace

RMeasure::RMeasure(std::vector<Atom> atoms, std::vector<DensityPiece> pieces) {
  for (const auto& a : atoms) {
    if (!(a.t.value() > 0.0)) throw ValidationError("measure atom location must be > 0");
    if (a.mass.value() < 0.0) throw ValidationError("measure atom mass must be >= 0");
    if (a.mass.value() > 0.0) atoms_.push_back(a);
  }
  std::sort(atoms_.begin(), atoms_.end(),
            [](const Atom& x, const Atom& y) { return x.t.value() < y.t.value(); });
  std::vector<Atom> merged;
  for (const auto& a : atoms_) {
    if (!merged.empty() && exactly_equal(merged.back().t, a.t))
      merged.back().mass += a.mass;
    else
      merged.push_back(a);
  }
  atoms_ = std::move(merged);

  for (auto& p : pieces) {
    if (p.density.is_zero()) continue;
    if (p.hi.value() <= p.lo.value()) continue;
    if (p.lo.value() < 0.0) throw ValidationError("density piece must lie in (0, inf)");
    if (p.density.degree() > kMaxBaseDegree + 1)
      throw ValidationError("density degree exceeds the supported cap");
    // Nonnegativity probed at Chebyshev nodes of the piece.
    for (int k = 0; k < 9; ++k) {
      const double theta = (2.0 * k + 1.0) * M_PI / 18.0;
      const double t =
          0.5 * (p.lo.value() + p.hi.value()) + 0.5 * (p.hi.value() - p.lo.value()) * std::cos(theta);
      if (p.density.eval(t) < -kDensityTol * std::max(1.0, std::fabs(p.density.eval(t))) &&
          p.density.eval(t) < -kDensityTol)
        throw ValidationError("density piece is negative at t=" + std::to_string(t));
    }
    pieces_.push_back(std::move(p));
  }
  std::sort(pieces_.begin(), pieces_.end(),
            [](const DensityPiece& x, const DensityPiece& y) { return x.lo.value() < y.lo.value(); });
  for (std::size_t i = 1; i < pieces_.size(); ++i) {
    if (pieces_[i].lo.value() < pieces_[i - 1].hi.value() - 1e-14)
      throw ValidationError("density pieces overlap near t=" + std::to_string(pieces_[i].lo.value()));
  }
}

RMeasure RMeasure::point_mass(Scalar t, Scalar mass) { return RMeasure({{t, mass}}, {}); }

RMeasure RMeasure::uniform(Scalar lo, Scalar hi) {
  return RMeasure({}, {{lo, hi, Polynomial::constant(Scalar(1))}});
}

RMeasure RMeasure::from_density(Scalar lo, Scalar hi, Polynomial density) {
  return RMeasure({}, {{lo, hi, std::move(density)}});
}

Scalar RMeasure::mass() const {
  Scalar m(0);
  for (const auto& a : atoms_) m += a.mass;
  for (const auto& p : pieces_) m += p.density.integral(p.lo, p.hi);
  return m;
}

Scalar RMeasure::moment() const {
  Scalar m(0);
  for (const auto& a : atoms_) m += a.mass * a.t;
  for (const auto& p : pieces_) m += p.density.times_t().integral(p.lo, p.hi);
  return m;
}

RMeasure RMeasure::restricted(const ValueInterval& w) const {
  if (w.empty()) return {};
  std::vector<Atom> atoms;
  for (const auto& a : atoms_)
    if (a.t.value() > w.lo.value() && (w.unbounded || a.t.value() <= w.hi.value()))
      atoms.push_back(a);
  std::vector<DensityPiece> pieces;
  for (const auto& p : pieces_) {
    Scalar lo = max(p.lo, w.lo);
    Scalar hi = w.unbounded ? p.hi : min(p.hi, w.hi);
    if (hi.value() > lo.value()) pieces.push_back({lo, hi, p.density});
  }
  return RMeasure(std::move(atoms), std::move(pieces));
}

RMeasure RMeasure::scaled(const Scalar& c) const {
  if (c.value() < 0.0) throw PreconditionError("measure scaling factor must be >= 0");
  std::vector<Atom> atoms = atoms_;
  for (auto& a : atoms) a.mass *= c;
  std::vector<DensityPiece> pieces = pieces_;
  for (auto& p : pieces) p.density = p.density.scaled(c);
  return RMeasure(std::move(atoms), std::move(pieces));
}

RMeasure RMeasure::t_weighted() const {
  std::vector<Atom> atoms = atoms_;
  for (auto& a : atoms) a.mass *= a.t;
  std::vector<DensityPiece> pieces = pieces_;
  for (auto& p : pieces) {
    if (p.density.degree() >= kMaxBaseDegree + 1)
      throw PreconditionError("t-weighting would push density degree past the cap");
    p.density = p.density.times_t();
  }
  return RMeasure(std::move(atoms), std::move(pieces));
}

RMeasure operator+(const RMeasure& a, const RMeasure& b) {
  std::vector<Atom> atoms = a.atoms_;
  atoms.insert(atoms.end(), b.atoms_.begin(), b.atoms_.end());
  // Overlapping density pieces are re-cut on the union of endpoints so the
  // result keeps disjoint interiors.
  std::vector<DensityPiece> all = a.pieces_;
  all.insert(all.end(), b.pieces_.begin(), b.pieces_.end());
  std::vector<Scalar> cuts;
  for (const auto& p : all) {
    cuts.push_back(p.lo);
    cuts.push_back(p.hi);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(),
                         [](const Scalar& x, const Scalar& y) { return x.value() == y.value(); }),
             cuts.end());
  std::vector<DensityPiece> pieces;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double mid = 0.5 * (cuts[i].value() + cuts[i + 1].value());
    Polynomial sum;
    bool any = false;
    for (const auto& p : all) {
      if (p.lo.value() < mid && mid <= p.hi.value()) {
        sum = any ? sum + p.density : p.density;
        any = true;
      }
    }
    if (any && !sum.is_zero()) pieces.push_back({cuts[i], cuts[i + 1], sum});
  }
  // Merge neighbours that carry the same polynomial to keep representations
  // small and stable under re-partitioning.
  std::vector<DensityPiece> merged;
  for (auto& p : pieces) {
    if (!merged.empty() && merged.back().hi.value() == p.lo.value() &&
        merged.back().density.equals(p.density, 0.0))
      merged.back().hi = p.hi;
    else
      merged.push_back(p);
  }
  return RMeasure(std::move(atoms), std::move(merged));
}

std::pair<RMeasure, RMeasure> RMeasure::decomposed() const {
  return {RMeasure({}, pieces_), RMeasure(atoms_, {})};
}

double RMeasure::cdf(double y) const {
  double acc = 0.0;
  for (const auto& a : atoms_)
    if (a.t.value() <= y) acc += a.mass.value();
  for (const auto& p : pieces_) {
    if (y <= p.lo.value()) continue;
    const double hi = std::min(y, p.hi.value());
    acc += p.density.integral(p.lo, Scalar(hi)).value();
  }
  return acc;
}

namespace {
struct SupportItem {
  double key;
  int tie;  // atoms before pieces that start at the same value
  std::size_t index;
  bool is_atom;
};

std::vector<SupportItem> support_order(const std::vector<Atom>& atoms,
                                       const std::vector<DensityPiece>& pieces) {
  std::vector<SupportItem> items;
  for (std::size_t i = 0; i < atoms.size(); ++i) items.push_back({atoms[i].t.value(), 0, i, true});
  for (std::size_t i = 0; i < pieces.size(); ++i)
    items.push_back({pieces[i].lo.value(), 1, i, false});
  std::sort(items.begin(), items.end(), [](const SupportItem& a, const SupportItem& b) {
    if (a.key != b.key) return a.key < b.key;
    return a.tie < b.tie;
  });
  return items;
}
}  // namespace

double RMeasure::quantile(double z) const { return quantile_cut(Scalar(z)).value(); }

Scalar RMeasure::quantile_cut(const Scalar& z) const {
  const double total = mass().value();
  if (!(z.value() >= 0.0) || z.value() >= total)
    throw PreconditionError("quantile argument " + std::to_string(z.value()) +
                            " outside [0, mass=" + std::to_string(total) + ")");
  Scalar cum(0);
  for (const auto& item : support_order(atoms_, pieces_)) {
    if (item.is_atom) {
      const Atom& a = atoms_[item.index];
      if (z.value() < (cum + a.mass).value()) return a.t;
      cum += a.mass;
    } else {
      const DensityPiece& p = pieces_[item.index];
      const Scalar pm = p.density.integral(p.lo, p.hi);
      if (z.value() < (cum + pm).value()) {
        const Scalar target = z - cum;
        if (p.density.degree() == 0) {
          return p.lo + target / p.density.coeffs()[0];
        }
        const Polynomial anti = p.density.antiderivative();
        const double base = anti.eval(p.lo.value());
        const double t = solve_increasing(
            [&](double x) { return anti.eval(x) - base - target.value(); },
            [&](double x) { return p.density.eval(x); }, p.lo.value(), p.hi.value());
        return Scalar(t);
      }
      cum += pm;
    }
  }
  // Rounding placed z at the very top of the mass range.
  if (!atoms_.empty() || !pieces_.empty()) {
    double top = 0.0;
    if (!atoms_.empty()) top = atoms_.back().t.value();
    if (!pieces_.empty()) top = std::max(top, pieces_.back().hi.value());
    return Scalar(top);
  }
  throw PreconditionError("quantile of the zero measure");
}

RMeasure RMeasure::quantile_slice(const Scalar& q0, const Scalar& q1) const {
  if (q1.value() <= q0.value()) return {};
  std::vector<Atom> atoms;
  std::vector<DensityPiece> pieces;
  Scalar cum(0);
  for (const auto& item : support_order(atoms_, pieces_)) {
    if (item.is_atom) {
      const Atom& a = atoms_[item.index];
      const Scalar lo = max(cum, q0);
      const Scalar hi = min(cum + a.mass, q1);
      if (hi.value() > lo.value()) atoms.push_back({a.t, hi - lo});
      cum += a.mass;
    } else {
      const DensityPiece& p = pieces_[item.index];
      const Scalar pm = p.density.integral(p.lo, p.hi);
      const Scalar lo = max(cum, q0);
      const Scalar hi = min(cum + pm, q1);
      if (hi.value() > lo.value()) {
        const Scalar cut_lo = piece_cdf_inverse(p, lo - cum);
        const Scalar cut_hi = piece_cdf_inverse(p, hi - cum);
        if (cut_hi.value() > cut_lo.value()) pieces.push_back({cut_lo, cut_hi, p.density});
      }
      cum += pm;
    }
  }
  return RMeasure(std::move(atoms), std::move(pieces));
}

std::complex<double> RMeasure::char_fn(std::complex<double> z) const {
  std::complex<double> acc{0.0, 0.0};
  for (const auto& a : atoms_) acc += a.mass.value() * std::exp(z * std::log(a.t.value()));
  for (const auto& p : pieces_) {
    const auto& c = p.density.coeffs();
    for (std::size_t k = 0; k < c.size(); ++k) {
      if (c[k].value() == 0.0) continue;
      const std::complex<double> w = z + static_cast<double>(k + 1);
      acc += c[k].value() * pow_diff(p.lo.value(), p.hi.value(), w) / w;
    }
  }
  return acc;
}

std::optional<std::pair<double, double>> RMeasure::support_bounds() const {
  if (is_zero()) return std::nullopt;
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (const auto& a : atoms_) {
    lo = std::min(lo, a.t.value());
    hi = std::max(hi, a.t.value());
  }
  for (const auto& p : pieces_) {
    lo = std::min(lo, p.lo.value());
    hi = std::max(hi, p.hi.value());
  }
  return std::make_pair(lo, hi);
}

RMeasure RMeasure::compacted(std::size_t max_atoms) const {
  if (atoms_.size() <= max_atoms) return *this;
  double lo = atoms_.front().t.value();
  double hi = atoms_.back().t.value();
  if (hi <= lo) return *this;
  const std::size_t bins = max_atoms;
  std::vector<double> m(bins, 0.0), mt(bins, 0.0);
  for (const auto& a : atoms_) {
    auto idx = static_cast<std::size_t>((a.t.value() - lo) / (hi - lo) * bins);
    if (idx >= bins) idx = bins - 1;
    m[idx] += a.mass.value();
    mt[idx] += a.mass.value() * a.t.value();
  }
  std::vector<Atom> atoms;
  for (std::size_t i = 0; i < bins; ++i)
    if (m[i] > 0.0) atoms.push_back({Scalar(mt[i] / m[i]), Scalar(m[i])});
  return RMeasure(std::move(atoms), pieces_);
}

RMeasure RMeasure::minus(const RMeasure& other, double tol) const {
  std::vector<Atom> atoms;
  std::size_t j = 0;
  for (const auto& a : atoms_) {
    Scalar m = a.mass;
    while (j < other.atoms_.size() && other.atoms_[j].t.value() < a.t.value() - 0.0) {
      if (other.atoms_[j].mass.value() > tol)
        throw ValidationError("difference of measures has a negative atom at t=" +
                              std::to_string(other.atoms_[j].t.value()));
      ++j;
    }
    if (j < other.atoms_.size() && exactly_equal(other.atoms_[j].t, a.t)) {
      m = m - other.atoms_[j].mass;
      ++j;
    }
    if (m.value() < -tol)
      throw ValidationError("difference of measures has a negative atom at t=" +
                            std::to_string(a.t.value()));
    if (m.value() > 0.0) atoms.push_back({a.t, m});
  }
  for (; j < other.atoms_.size(); ++j)
    if (other.atoms_[j].mass.value() > tol)
      throw ValidationError("difference of measures has a negative atom at t=" +
                            std::to_string(other.atoms_[j].t.value()));

  std::vector<Scalar> cuts;
  for (const auto& p : pieces_) {
    cuts.push_back(p.lo);
    cuts.push_back(p.hi);
  }
  for (const auto& p : other.pieces_) {
    cuts.push_back(p.lo);
    cuts.push_back(p.hi);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(),
                         [](const Scalar& x, const Scalar& y) { return x.value() == y.value(); }),
             cuts.end());
  std::vector<DensityPiece> pieces;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double mid = 0.5 * (cuts[i].value() + cuts[i + 1].value());
    Polynomial diff;
    for (const auto& p : pieces_)
      if (p.lo.value() < mid && mid <= p.hi.value()) diff = diff + p.density;
    for (const auto& p : other.pieces_)
      if (p.lo.value() < mid && mid <= p.hi.value()) diff = diff - p.density;
    if (diff.is_zero()) continue;
    for (int k = 0; k <= 8; ++k) {
      const double t = cuts[i].value() + (cuts[i + 1].value() - cuts[i].value()) * (k + 0.5) / 9.0;
      if (diff.eval(t) < -std::max(tol, 1e-12))
        throw ValidationError("difference of measures has negative density at t=" +
                              std::to_string(t));
    }
    pieces.push_back({cuts[i], cuts[i + 1], diff});
  }
  return RMeasure(std::move(atoms), std::move(pieces));
}

double RMeasure::cdf_sup_distance(const RMeasure& other, int grid_points) const {
  std::vector<double> probes;
  auto add_bounds = [&probes](const RMeasure& m) {
    for (const auto& a : m.atoms()) {
      probes.push_back(a.t.value());
      probes.push_back(std::nextafter(a.t.value(), 0.0));
    }
    for (const auto& p : m.pieces()) {
      probes.push_back(p.lo.value());
      probes.push_back(p.hi.value());
    }
  };
  add_bounds(*this);
  add_bounds(other);
  double lo = 0.0, hi = 1.0;
  if (auto b = support_bounds()) {
    lo = std::min(lo, b->first);
    hi = std::max(hi, b->second);
  }
  if (auto b = other.support_bounds()) {
    lo = std::min(lo, b->first);
    hi = std::max(hi, b->second);
  }
  for (int i = 0; i <= grid_points; ++i) probes.push_back(lo + (hi - lo) * i / grid_points);
  double sup = 0.0;
  for (double y : probes) sup = std::max(sup, std::fabs(cdf(y) - other.cdf(y)));
  return sup;
}

bool RMeasure::same_atoms(const RMeasure& other, double mass_tol) const {
  if (atoms_.size() != other.atoms_.size()) return false;
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    if (!exactly_equal(atoms_[i].t, other.atoms_[i].t) &&
        atoms_[i].t.value() != other.atoms_[i].t.value())
      return false;
    if (std::fabs(atoms_[i].mass.value() - other.atoms_[i].mass.value()) > mass_tol) return false;
  }
  return true;
}

StripGrid StripGrid::standard(double im_max, double im_step) {
  StripGrid g;
  g.re = {0.0, 0.25, 0.5, 0.75, 1.0};
  for (double v = -im_max; v <= im_max + 1e-12; v += im_step) g.im.push_back(v);
  return g;
}

void StripGrid::validate() const {
  auto has = [](const std::vector<double>& v, double x) {
    for (double y : v)
      if (y == x) return true;
    return false;
  };
  if (!has(re, 0.0) || !has(re, 1.0))
    throw ValidationError("strip grid must contain Re z = 0 and Re z = 1");
  if (!has(im, 0.0)) throw ValidationError("strip grid must contain Im z = 0");
  for (double u : re)
    if (u < 0.0 || u > 1.0) throw ValidationError("strip grid Re z outside [0, 1]");
}

std::vector<std::complex<double>> StripGrid::points() const {
  std::vector<std::complex<double>> pts;
  pts.reserve(re.size() * im.size());
  for (double u : re)
    for (double v : im) pts.emplace_back(u, v);
  return pts;
}

double measure_distance(const RMeasure& a, const RMeasure& b, const StripGrid& grid) {
  double d = 0.0;
  for (const auto& z : grid.points()) d = std::max(d, std::abs(a.char_fn(z) - b.char_fn(z)));
  return d;
}

std::int64_t value_bin_index(const Scalar& t, int level) {
  if (t.exact()) {
    const auto& q = *t.exact();
    // ceil(t * 2^level) computed exactly.
    const __int128 scaled_num = static_cast<__int128>(q.num()) << level;
    const __int128 den = q.den();
    __int128 j = scaled_num / den;
    if (scaled_num % den != 0) j += 1;
    return static_cast<std::int64_t>(j);
  }
  const double w = std::ldexp(1.0, -level);
  auto j = static_cast<std::int64_t>(std::ceil(t.value() / w));
  while ((j - 1) * w >= t.value()) --j;
  while (j * w < t.value()) ++j;
  return j;
}

RMeasure bin_discretize(const RMeasure& nu, const ValueBinGrid& grid) {
  std::map<std::int64_t, std::pair<Scalar, Scalar>> bins;  // j -> (mass, moment)
  auto deposit = [&bins](std::int64_t j, const Scalar& m, const Scalar& mt) {
    auto& slot = bins[j];
    slot.first += m;
    slot.second += mt;
  };
  for (const auto& a : nu.atoms()) deposit(value_bin_index(a.t, grid.level), a.mass, a.mass * a.t);
  const Scalar width = Scalar::ratio(1, std::int64_t(1) << grid.level);
  for (const auto& p : nu.pieces()) {
    const std::int64_t j_lo = value_bin_index(p.lo, grid.level);
    const std::int64_t j_hi = value_bin_index(p.hi, grid.level);
    for (std::int64_t j = std::max<std::int64_t>(j_lo, 1); j <= j_hi; ++j) {
      const Scalar lo = max(p.lo, Scalar(j - 1) * width);
      const Scalar hi = min(p.hi, Scalar(j) * width);
      if (hi.value() <= lo.value()) continue;
      const Scalar m = p.density.integral(lo, hi);
      if (m.value() <= 0.0) continue;
      deposit(j, m, p.density.times_t().integral(lo, hi));
    }
  }
  std::vector<Atom> atoms;
  for (const auto& [j, mm] : bins) {
    if (mm.first.value() <= 0.0) continue;
    atoms.push_back({mm.second / mm.first, mm.first});
  }
  return RMeasure(std::move(atoms), {});
}

NormalizationResiduals check_normalized(const RMeasure& nu, double tol) {
  NormalizationResiduals r{};
  r.mass_residual = nu.mass().value() - 1.0;
  r.moment_residual = nu.moment().value() - 1.0;
  r.ok = std::fabs(r.mass_residual) <= tol && std::fabs(r.moment_residual) <= tol;
  return r;
}

}  // namespace gms
