#include "gms/pw_map.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace gms {

namespace {

std::string interval_str(double a, double b) {
  std::ostringstream os;
  os << "[" << a << ", " << b << ")";
  return os.str();
}

// --- fast double-only walks over a measure's support in value order -------

struct WalkItem {
  double key;
  int tie;
  const Atom* atom = nullptr;
  const DensityPiece* piece = nullptr;
};

std::vector<WalkItem> walk_items(const RMeasure& m) {
  std::vector<WalkItem> items;
  for (const auto& a : m.atoms()) items.push_back({a.t.value(), 0, &a, nullptr});
  for (const auto& p : m.pieces()) items.push_back({p.lo.value(), 1, nullptr, &p});
  std::sort(items.begin(), items.end(), [](const WalkItem& a, const WalkItem& b) {
    if (a.key != b.key) return a.key < b.key;
    return a.tie < b.tie;
  });
  return items;
}

double piece_cut(const DensityPiece& p, double local_mass) {
  if (local_mass <= 0.0) return p.lo.value();
  if (p.density.degree() == 0) {
    return std::min(p.hi.value(), p.lo.value() + local_mass / p.density.coeffs()[0].value());
  }
  const Polynomial anti = p.density.antiderivative();
  const double base = anti.eval(p.lo.value());
  double lo = p.lo.value(), hi = p.hi.value();
  if (anti.eval(hi) - base <= local_mass) return hi;
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 100; ++it) {
    const double fx = anti.eval(x) - base - local_mass;
    if (fx > 0)
      hi = x;
    else
      lo = x;
    if (hi - lo < 1e-15 * std::max(1.0, hi)) break;
    const double d = p.density.eval(x);
    double next = d > 0 ? x - fx / d : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    x = next;
  }
  return 0.5 * (lo + hi);
}

// integral of the quantile function of m over [0, q)
double prefix_moment(const RMeasure& m, double q) {
  if (q <= 0.0) return 0.0;
  double cum = 0.0, acc = 0.0;
  for (const auto& it : walk_items(m)) {
    if (cum >= q) break;
    if (it.atom) {
      const double mass = it.atom->mass.value();
      acc += std::min(q - cum, mass) * it.atom->t.value();
      cum += mass;
    } else {
      const auto& p = *it.piece;
      const double pm = p.density.integral(p.lo, p.hi).value();
      const double local = std::min(q - cum, pm);
      const double t = piece_cut(p, local);
      acc += p.density.times_t().integral(p.lo, Scalar(t)).value();
      cum += pm;
    }
  }
  return acc;
}

double quantile_fast(const RMeasure& m, double q) {
  double cum = 0.0;
  double top = 0.0;
  for (const auto& it : walk_items(m)) {
    if (it.atom) {
      const double mass = it.atom->mass.value();
      if (q < cum + mass) return it.atom->t.value();
      cum += mass;
      top = it.atom->t.value();
    } else {
      const auto& p = *it.piece;
      const double pm = p.density.integral(p.lo, p.hi).value();
      if (q < cum + pm) return piece_cut(p, q - cum);
      cum += pm;
      top = p.hi.value();
    }
  }
  return top;
}

double seg_eval(const Segment& s, double x) {
  if (x >= s.x1.value()) return s.y1.value();
  if (x <= s.x0.value()) return s.y0.value();
  if (const auto* lin = std::get_if<LinearForm>(&s.form))
    return s.y0.value() + lin->slope.value() * (x - s.x0.value());
  if (const auto* qf = std::get_if<QuantileForm>(&s.form)) {
    const double q0 = qf->offset.value();
    return s.y0.value() + prefix_moment(qf->base, q0 + (x - s.x0.value())) -
           prefix_moment(qf->base, q0);
  }
  return std::get<SampledForm>(s.form).value(x);
}

Scalar seg_eval_scalar(const Segment& s, const Scalar& x) {
  if (x.value() >= s.x1.value()) return s.y1;
  if (x.value() <= s.x0.value()) return s.y0;
  if (const auto* lin = std::get_if<LinearForm>(&s.form)) return s.y0 + lin->slope * (x - s.x0);
  if (const auto* qf = std::get_if<QuantileForm>(&s.form)) {
    return s.y0 + qf->base.quantile_slice(qf->offset, qf->offset + (x - s.x0)).moment();
  }
  return Scalar(std::get<SampledForm>(s.form).value(x.value()));
}

double seg_slope(const Segment& s, double x) {
  if (const auto* lin = std::get_if<LinearForm>(&s.form)) return lin->slope.value();
  if (const auto* qf = std::get_if<QuantileForm>(&s.form)) {
    const double mass = qf->base.mass().value();
    double q = qf->offset.value() + (x - s.x0.value());
    q = std::min(std::max(q, 0.0), mass * (1.0 - 1e-15));
    return quantile_fast(qf->base, q);
  }
  return std::get<SampledForm>(s.form).slope(x);
}

// x in [x0, x1] with seg(x) == y, exact for linear segments.
Scalar seg_inverse(const Segment& s, const Scalar& y) {
  if (y.value() <= s.y0.value()) return s.x0;
  if (y.value() >= s.y1.value()) return s.x1;
  if (const auto* lin = std::get_if<LinearForm>(&s.form)) return s.x0 + (y - s.y0) / lin->slope;
  if (const auto* qf = std::get_if<QuantileForm>(&s.form)) {
    const double q0 = qf->offset.value();
    const double base0 = prefix_moment(qf->base, q0);
    const double target = y.value() - s.y0.value();
    double lo = 0.0, hi = s.x1.value() - s.x0.value();
    double q = 0.5 * hi;
    for (int it = 0; it < 100; ++it) {
      const double f = prefix_moment(qf->base, q0 + q) - base0 - target;
      if (f > 0)
        hi = q;
      else
        lo = q;
      if (hi - lo < 1e-15) break;
      const double d = quantile_fast(qf->base, q0 + q);
      double next = d > 0 ? q - f / d : 0.5 * (lo + hi);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      q = next;
    }
    return s.x0 + Scalar(0.5 * (lo + hi));
  }
  const auto& sf = std::get<SampledForm>(s.form);
  double lo = s.x0.value(), hi = s.x1.value();
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (sf.value(mid) > y.value())
      hi = mid;
    else
      lo = mid;
  }
  return Scalar(0.5 * (lo + hi));
}

RMeasure value_scale(const RMeasure& b, const Scalar& r) {
  std::vector<Atom> atoms;
  for (const auto& a : b.atoms()) atoms.push_back({a.t * r, a.mass});
  std::vector<DensityPiece> pieces;
  for (const auto& p : b.pieces())
    pieces.push_back({p.lo * r, p.hi * r, p.density.stretched(r).scaled(Scalar(1) / r)});
  return RMeasure(std::move(atoms), std::move(pieces));
}

// Base for the quantile form of (quantile segment) after (linear slope s):
// values scale by s, masses by 1/s.
RMeasure compose_scale(const RMeasure& b, const Scalar& s) {
  std::vector<Atom> atoms;
  for (const auto& a : b.atoms()) atoms.push_back({a.t * s, a.mass / s});
  std::vector<DensityPiece> pieces;
  for (const auto& p : b.pieces())
    pieces.push_back({p.lo * s, p.hi * s, p.density.stretched(s).scaled(Scalar(1) / (s * s))});
  return RMeasure(std::move(atoms), std::move(pieces));
}

}  // namespace

// ---------------------------------------------------------------- IntervalSet

IntervalSet::IntervalSet(std::vector<std::pair<Scalar, Scalar>> parts) {
  for (auto& p : parts) {
    if (p.second.value() <= p.first.value()) continue;
    if (p.first.value() < -1e-12 || p.second.value() > 1.0 + 1e-12)
      throw ValidationError("interval set component " +
                            interval_str(p.first.value(), p.second.value()) +
                            " escapes [0, 1]");
    parts_.push_back(p);
  }
  std::sort(parts_.begin(), parts_.end(),
            [](const auto& a, const auto& b) { return a.first.value() < b.first.value(); });
  std::vector<std::pair<Scalar, Scalar>> merged;
  for (const auto& p : parts_) {
    if (!merged.empty() && p.first.value() <= merged.back().second.value()) {
      if (p.second.value() > merged.back().second.value()) merged.back().second = p.second;
    } else {
      merged.push_back(p);
    }
  }
  parts_ = std::move(merged);
}

IntervalSet IntervalSet::whole() { return single(Scalar(0), Scalar(1)); }

IntervalSet IntervalSet::single(Scalar a, Scalar b) { return IntervalSet({{a, b}}); }

IntervalSet IntervalSet::dyadic_cell(int level, int k) {
  const std::int64_t den = std::int64_t(1) << level;
  return single(Scalar::ratio(k, den), Scalar::ratio(k + 1, den));
}

Scalar IntervalSet::measure() const {
  Scalar m(0);
  for (const auto& p : parts_) m += p.second - p.first;
  return m;
}

IntervalSet IntervalSet::intersect(const IntervalSet& other) const {
  std::vector<std::pair<Scalar, Scalar>> out;
  std::size_t i = 0, j = 0;
  while (i < parts_.size() && j < other.parts_.size()) {
    const Scalar lo = max(parts_[i].first, other.parts_[j].first);
    const Scalar hi = min(parts_[i].second, other.parts_[j].second);
    if (hi.value() > lo.value()) out.emplace_back(lo, hi);
    if (parts_[i].second.value() <= other.parts_[j].second.value())
      ++i;
    else
      ++j;
  }
  return IntervalSet(std::move(out));
}

bool IntervalSet::contains(double x) const {
  for (const auto& p : parts_)
    if (x >= p.first.value() && x < p.second.value()) return true;
  return false;
}

std::vector<IntervalSet> dyadic_partition(int level) {
  std::vector<IntervalSet> cells;
  for (int k = 0; k < (1 << level); ++k) cells.push_back(IntervalSet::dyadic_cell(level, k));
  return cells;
}

// --------------------------------------------------------------------- PwMap

PwMap::PwMap(std::vector<Segment> segments, double consistency_tol) : segs_(std::move(segments)) {
  if (segs_.empty()) throw ValidationError("a map needs at least one segment");
  std::sort(segs_.begin(), segs_.end(),
            [](const Segment& a, const Segment& b) { return a.x0.value() < b.x0.value(); });
  if (std::fabs(segs_.front().x0.value()) > 1e-12 || std::fabs(segs_.back().x1.value() - 1.0) > 1e-12)
    throw ValidationError("segment domains must tile [0, 1]");
  for (std::size_t i = 0; i + 1 < segs_.size(); ++i) {
    if (std::fabs(segs_[i].x1.value() - segs_[i + 1].x0.value()) > 1e-12) {
      throw ValidationError("segments " + std::to_string(i) + " and " + std::to_string(i + 1) +
                            " have non-contiguous domains " +
                            interval_str(segs_[i].x0.value(), segs_[i].x1.value()) + " / " +
                            interval_str(segs_[i + 1].x0.value(), segs_[i + 1].x1.value()));
    }
  }

  std::vector<std::size_t> by_image(segs_.size());
  for (std::size_t i = 0; i < by_image.size(); ++i) by_image[i] = i;
  std::sort(by_image.begin(), by_image.end(), [this](std::size_t a, std::size_t b) {
    return segs_[a].y0.value() < segs_[b].y0.value();
  });
  Scalar covered(0);
  for (std::size_t i = 0; i < by_image.size(); ++i) {
    const Segment& s = segs_[by_image[i]];
    covered += s.y1 - s.y0;
    if (i + 1 < by_image.size()) {
      const Segment& next = segs_[by_image[i + 1]];
      if (next.y0.value() < s.y1.value() - 1e-12)
        throw ValidationError("segments " + std::to_string(by_image[i]) + " and " +
                              std::to_string(by_image[i + 1]) + " have overlapping images " +
                              interval_str(s.y0.value(), s.y1.value()) + " / " +
                              interval_str(next.y0.value(), next.y1.value()));
    }
  }
  if (std::fabs(covered.value() - 1.0) > 1e-9)
    throw ValidationError("segment images cover measure " + std::to_string(covered.value()) +
                          " instead of 1");

  for (std::size_t i = 0; i < segs_.size(); ++i) {
    const Segment& s = segs_[i];
    if (!(s.x1.value() > s.x0.value()) || !(s.y1.value() > s.y0.value()))
      throw ValidationError("segment " + std::to_string(i) + " is degenerate");
    const double span = s.y1.value() - s.y0.value();
    if (const auto* lin = std::get_if<LinearForm>(&s.form)) {
      if (!(lin->slope.value() > 0.0))
        throw ValidationError("segment " + std::to_string(i) + " slope must be positive");
      if (std::fabs(lin->slope.value() * (s.x1.value() - s.x0.value()) - span) > consistency_tol)
        throw ValidationError("segment " + std::to_string(i) +
                              ": image length does not match slope * domain length");
    } else if (const auto* qf = std::get_if<QuantileForm>(&s.form)) {
      if (!qf->base.is_continuous())
        throw ValidationError("segment " + std::to_string(i) +
                              ": quantile base measure must be continuous");
      const double window = s.x1.value() - s.x0.value();
      if (qf->offset.value() < -1e-12 ||
          qf->offset.value() + window > qf->base.mass().value() + 1e-12)
        throw ValidationError("segment " + std::to_string(i) +
                              ": quantile window escapes the base measure");
      const double wm =
          qf->base.quantile_slice(qf->offset, qf->offset + Scalar(window)).moment().value();
      if (std::fabs(wm - span) > std::max(consistency_tol, 1e-12))
        throw ValidationError("segment " + std::to_string(i) +
                              ": image length does not match the quantile window moment (" +
                              std::to_string(wm) + " vs " + std::to_string(span) + ")");
    }
  }
}

PwMap PwMap::identity() {
  return PwMap({Segment{Scalar(0), Scalar(1), Scalar(0), Scalar(1), LinearForm{Scalar(1)}}});
}

bool PwMap::exact_class() const {
  for (const auto& s : segs_)
    if (s.numeric()) return false;
  return true;
}

const Segment& PwMap::segment_at(double x) const {
  if (x < 0.0 || x > 1.0) throw PreconditionError("map argument outside [0, 1]");
  // Left-continuous representative: a breakpoint belongs to the segment
  // ending there.
  std::size_t lo = 0, hi = segs_.size();
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    if (segs_[mid].x0.value() < x)
      lo = mid;
    else
      hi = mid;
  }
  return segs_[lo];
}

double PwMap::evaluate(double x) const { return seg_eval(segment_at(x), x); }

Scalar PwMap::evaluate_scalar(const Scalar& x) const {
  return seg_eval_scalar(segment_at(x.value()), x);
}

double PwMap::derivative(double x) const {
  const Segment& s = segment_at(x);
  return seg_slope(s, std::min(x, s.x1.value() * (1.0 - 1e-16)));
}

PwMap PwMap::inverted() const {
  std::vector<Segment> out;
  for (const auto& s : segs_) {
    Segment inv{s.y0, s.y1, s.x0, s.x1, LinearForm{Scalar(1)}};
    if (const auto* lin = std::get_if<LinearForm>(&s.form)) {
      inv.form = LinearForm{Scalar(1) / lin->slope};
    } else {
      Segment seg_copy = s;
      SampledForm sf;
      sf.value = [seg_copy](double y) { return seg_inverse(seg_copy, Scalar(y)).value(); };
      sf.slope = [seg_copy](double y) {
        const double x = seg_inverse(seg_copy, Scalar(y)).value();
        const double d = seg_slope(seg_copy, std::min(x, seg_copy.x1.value() * (1.0 - 1e-16)));
        return d > 0 ? 1.0 / d : 0.0;
      };
      if (const auto* smp = std::get_if<SampledForm>(&s.form)) {
        for (double b : smp->slope_breaks) sf.slope_breaks.push_back(seg_eval(s, b));
        sf.min_law_samples = smp->min_law_samples;
      }
      inv.form = std::move(sf);
    }
    out.push_back(std::move(inv));
  }
  return PwMap(std::move(out));
}

PwMap compose(const PwMap& outer, const PwMap& inner) {
  std::vector<Scalar> cuts;
  for (const auto& s : inner.segments()) {
    cuts.push_back(s.x0);
    cuts.push_back(s.x1);
  }
  for (const auto& fs : outer.segments()) {
    for (const Scalar& b : {fs.x0, fs.x1}) {
      for (const auto& gs : inner.segments()) {
        if (b.value() > gs.y0.value() + 1e-15 && b.value() < gs.y1.value() - 1e-15)
          cuts.push_back(seg_inverse(gs, b));
      }
    }
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(),
                         [](const Scalar& a, const Scalar& b) { return a.value() == b.value(); }),
             cuts.end());

  auto outer_ptr = std::make_shared<PwMap>(outer);
  auto inner_ptr = std::make_shared<PwMap>(inner);

  // Quantile windows of consecutive pieces are chained additively so that a
  // window end and the next window start are the same scalar; derivative-law
  // slices of re-cut segments then reassemble without seams.
  const Segment* window_inner = nullptr;
  Scalar inner_window_pos(0);
  const Segment* window_outer = nullptr;
  Scalar outer_window_pos(0);

  std::vector<Segment> out;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const Scalar c = cuts[i], d = cuts[i + 1];
    if (d.value() - c.value() <= 1e-15) continue;
    const double xm = 0.5 * (c.value() + d.value());
    const Segment& gs = inner.segment_at(xm);
    const Segment& fs = outer.segment_at(inner.evaluate(xm));

    const Scalar yc = seg_eval_scalar(gs, c);
    const Scalar yd = seg_eval_scalar(gs, d);
    const Scalar zc = seg_eval_scalar(fs, yc);
    const Scalar zd = seg_eval_scalar(fs, yd);
    Segment seg{c, d, zc, zd, LinearForm{Scalar(1)}};

    const auto* glin = std::get_if<LinearForm>(&gs.form);
    const auto* gq = std::get_if<QuantileForm>(&gs.form);
    const auto* flin = std::get_if<LinearForm>(&fs.form);
    const auto* fq = std::get_if<QuantileForm>(&fs.form);

    if (gq && window_inner != &gs) {
      window_inner = &gs;
      inner_window_pos = gq->offset + (c - gs.x0);
    }
    if (fq) {
      // A rearranging inner map may re-enter fs at a distant image point;
      // only chain across y-contiguous pieces.
      const Scalar fresh = fq->offset + (yc - fs.x0);
      if (window_outer != &fs || std::fabs(outer_window_pos.value() - fresh.value()) > 1e-12) {
        window_outer = &fs;
        outer_window_pos = fresh;
      }
    }

    if (glin && flin) {
      seg.form = LinearForm{flin->slope * glin->slope};
    } else if (glin && fq) {
      seg.form =
          QuantileForm{compose_scale(fq->base, glin->slope), outer_window_pos / glin->slope};
    } else if (gq && flin) {
      seg.form = QuantileForm{value_scale(gq->base, flin->slope), inner_window_pos};
    } else {
      SampledForm sf;
      sf.value = [outer_ptr, inner_ptr](double x) {
        return outer_ptr->evaluate(inner_ptr->evaluate(x));
      };
      sf.slope = [outer_ptr, inner_ptr](double x) {
        return outer_ptr->derivative(inner_ptr->evaluate(x)) * inner_ptr->derivative(x);
      };
      if (const auto* gsmp = std::get_if<SampledForm>(&gs.form)) {
        sf.min_law_samples = gsmp->min_law_samples;
        for (double b : gsmp->slope_breaks)
          if (b > c.value() && b < d.value()) sf.slope_breaks.push_back(b);
      }
      if (const auto* fsmp = std::get_if<SampledForm>(&fs.form)) {
        sf.min_law_samples = std::max(sf.min_law_samples, fsmp->min_law_samples);
        for (double b : fsmp->slope_breaks)
          if (b > yc.value() && b < yd.value())
            sf.slope_breaks.push_back(seg_inverse(gs, Scalar(b)).value());
      }
      std::sort(sf.slope_breaks.begin(), sf.slope_breaks.end());
      seg.form = std::move(sf);
    }
    if (gq) inner_window_pos += d - c;
    if (fq) outer_window_pos += yd - yc;
    out.push_back(std::move(seg));
  }
  return PwMap(std::move(out), 1e-11);
}

// ------------------------------------------------------ derivative laws

RMeasure segment_interval_law(const Segment& s, const Scalar& c, const Scalar& d) {
  if (d.value() <= c.value()) return {};
  if (const auto* lin = std::get_if<LinearForm>(&s.form)) {
    return RMeasure::point_mass(lin->slope, d - c);
  }
  if (const auto* qf = std::get_if<QuantileForm>(&s.form)) {
    return qf->base.quantile_slice(qf->offset + (c - s.x0), qf->offset + (d - s.x0));
  }
  // Averaged-slope binning: subcell mass is exact and the atom sits at the
  // mean derivative, so total mass and moment match the map increments.
  const auto& sf = std::get<SampledForm>(s.form);
  const double len = d.value() - c.value();
  const int n = std::max(64, static_cast<int>(std::ceil(sf.min_law_samples * len)));
  std::vector<Atom> atoms;
  atoms.reserve(n);
  double prev_x = c.value();
  double prev_y = sf.value(prev_x);
  for (int k = 1; k <= n; ++k) {
    const double x = c.value() + len * k / n;
    const double y = sf.value(x);
    const double w = x - prev_x;
    if (w > 0.0 && y > prev_y) atoms.push_back({Scalar((y - prev_y) / w), Scalar(w)});
    prev_x = x;
    prev_y = y;
  }
  return RMeasure(std::move(atoms), {});
}

Scalar segment_value(const Segment& s, const Scalar& x) { return seg_eval_scalar(s, x); }

Scalar segment_preimage(const Segment& s, const Scalar& y) { return seg_inverse(s, y); }

std::vector<std::pair<Scalar, Scalar>> segment_region(const Segment& s, const IntervalSet& A,
                                                      const IntervalSet& B) {
  const IntervalSet dom = A.intersect(IntervalSet::single(s.x0, s.x1));
  if (dom.empty()) return {};
  std::vector<std::pair<Scalar, Scalar>> pre;
  for (const auto& b : B.parts()) {
    const Scalar ylo = max(b.first, s.y0);
    const Scalar yhi = min(b.second, s.y1);
    if (yhi.value() <= ylo.value()) continue;
    pre.emplace_back(seg_inverse(s, ylo), seg_inverse(s, yhi));
  }
  return dom.intersect(IntervalSet(std::move(pre))).parts();
}

RMeasure rn_distribution(const PwMap& g, const IntervalSet& A, const IntervalSet& B) {
  RMeasure acc;
  for (const auto& s : g.segments()) {
    RMeasure seg_acc;
    for (const auto& [c, d] : segment_region(s, A, B))
      seg_acc = seg_acc + segment_interval_law(s, c, d);
    if (!seg_acc.is_zero()) acc = acc + seg_acc;
  }
  return acc;
}

Scalar image_measure(const PwMap& g, const IntervalSet& A) {
  Scalar total(0);
  for (const auto& s : g.segments()) {
    for (const auto& [a, b] : A.parts()) {
      const Scalar lo = max(a, s.x0);
      const Scalar hi = min(b, s.x1);
      if (hi.value() <= lo.value()) continue;
      total += seg_eval_scalar(s, hi) - seg_eval_scalar(s, lo);
    }
  }
  return total;
}

void DistributionMatrix::check_constraints(double tol) const {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    Scalar row_mass(0), col_moment(0);
    for (std::size_t j = 0; j < cells.size(); ++j) {
      row_mass += entries[i][j].mass();
      col_moment += entries[j][i].moment();
    }
    if (std::fabs(row_mass.value() - cells[i].measure().value()) > tol)
      throw ValidationError("distribution matrix row " + std::to_string(i) +
                            " mass sum mismatch");
    if (std::fabs(col_moment.value() - cells[i].measure().value()) > tol)
      throw ValidationError("distribution matrix column " + std::to_string(i) +
                            " moment sum mismatch");
  }
}

DistributionMatrix distribution_matrix(const PwMap& g, const std::vector<IntervalSet>& partition) {
  Scalar total(0);
  for (std::size_t i = 0; i < partition.size(); ++i) {
    total += partition[i].measure();
    for (std::size_t j = i + 1; j < partition.size(); ++j) {
      if (!partition[i].intersect(partition[j]).empty())
        throw ValidationError("partition cells " + std::to_string(i) + " and " +
                              std::to_string(j) + " overlap");
    }
  }
  if (std::fabs(total.value() - 1.0) > 1e-12)
    throw ValidationError("partition does not cover [0, 1]");
  DistributionMatrix m;
  m.cells = partition;
  m.entries.resize(partition.size());
  for (std::size_t i = 0; i < partition.size(); ++i) {
    m.entries[i].reserve(partition.size());
    for (std::size_t j = 0; j < partition.size(); ++j)
      m.entries[i].push_back(rn_distribution(g, partition[i], partition[j]));
  }
  return m;
}

// ------------------------------------------------------ section and friends

PwMap convex_section(const RMeasure& nu, double tol) {
  const auto residuals = check_normalized(nu, tol);
  if (!residuals.ok) {
    std::ostringstream os;
    os << "convex section needs mass == 1 and moment == 1: residuals " << residuals.mass_residual
       << ", " << residuals.moment_residual;
    throw PreconditionError(os.str());
  }

  // Split density pieces at interior atom locations, then sweep the support
  // in value order; atom flats of the quantile become linear segments, piece
  // runs become quantile-integral segments.
  std::vector<DensityPiece> pieces;
  for (const auto& p : nu.pieces()) {
    std::vector<Scalar> cuts{p.lo};
    for (const auto& a : nu.atoms())
      if (a.t.value() > p.lo.value() && a.t.value() < p.hi.value()) cuts.push_back(a.t);
    cuts.push_back(p.hi);
    std::sort(cuts.begin(), cuts.end());
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
      if (cuts[i + 1].value() > cuts[i].value())
        pieces.push_back({cuts[i], cuts[i + 1], p.density});
  }
  struct Event {
    double key;
    int tie;
    const Atom* atom;
    const DensityPiece* piece;
  };
  std::vector<Event> events;
  for (const auto& a : nu.atoms()) events.push_back({a.t.value(), 0, &a, nullptr});
  for (const auto& p : pieces) events.push_back({p.lo.value(), 1, nullptr, &p});
  std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
    if (a.key != b.key) return a.key < b.key;
    return a.tie < b.tie;
  });

  std::vector<Segment> segs;
  Scalar q(0), y(0);
  std::vector<DensityPiece> run;
  Scalar run_mass(0), run_moment(0);
  auto flush_run = [&]() {
    if (run.empty()) return;
    Segment s{q, q + run_mass, y, y + run_moment, QuantileForm{RMeasure({}, run), Scalar(0)}};
    segs.push_back(std::move(s));
    q += run_mass;
    y += run_moment;
    run.clear();
    run_mass = Scalar(0);
    run_moment = Scalar(0);
  };
  for (const auto& e : events) {
    if (e.atom) {
      flush_run();
      const Scalar m = e.atom->mass;
      segs.push_back(
          Segment{q, q + m, y, y + m * e.atom->t, LinearForm{e.atom->t}});
      q += m;
      y += m * e.atom->t;
    } else {
      run.push_back(*e.piece);
      run_mass += e.piece->density.integral(e.piece->lo, e.piece->hi);
      run_moment += e.piece->density.times_t().integral(e.piece->lo, e.piece->hi);
    }
  }
  flush_run();
  if (segs.empty()) throw PreconditionError("convex section of the zero measure");

  // Snap the accumulated endpoint to (1, 1); the drift is bounded by the
  // admitted normalization residuals.
  segs.back().x1 = Scalar(1);
  segs.back().y1 = Scalar(1);
  return PwMap(std::move(segs), std::max(1e-12, 8.0 * tol));
}

PwMap random_interval_exchange(std::uint64_t seed, int n_pieces) {
  if (n_pieces < 1) throw PreconditionError("interval exchange needs at least one piece");
  constexpr int kLevel = 9;
  const std::int64_t slots = std::int64_t(1) << kLevel;
  if (n_pieces > slots / 2) throw PreconditionError("too many exchange pieces");
  std::mt19937_64 rng(seed);

  std::vector<std::int64_t> interior(slots - 1);
  for (std::int64_t i = 0; i < slots - 1; ++i) interior[i] = i + 1;
  std::shuffle(interior.begin(), interior.end(), rng);
  std::vector<std::int64_t> cuts(interior.begin(), interior.begin() + (n_pieces - 1));
  cuts.push_back(0);
  cuts.push_back(slots);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  const auto pieces = static_cast<std::size_t>(cuts.size() - 1);
  std::vector<std::size_t> order(pieces);
  for (std::size_t i = 0; i < pieces; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<Scalar> img_start(pieces);
  Scalar pos(0);
  for (std::size_t rank = 0; rank < pieces; ++rank) {
    const std::size_t piece = order[rank];
    img_start[piece] = pos;
    pos += Scalar::ratio(cuts[piece + 1] - cuts[piece], slots);
  }
  std::vector<Segment> segs;
  for (std::size_t i = 0; i < pieces; ++i) {
    const Scalar a = Scalar::ratio(cuts[i], slots);
    const Scalar b = Scalar::ratio(cuts[i + 1], slots);
    segs.push_back(Segment{a, b, img_start[i], img_start[i] + (b - a), LinearForm{Scalar(1)}});
  }
  return PwMap(std::move(segs));
}

bool is_measure_preserving(const PwMap& g) {
  const RMeasure law = rn_distribution(g, IntervalSet::whole(), IntervalSet::whole());
  return law.pieces().empty() && law.atoms().size() == 1 && law.atoms()[0].t.value() == 1.0;
}

PwMap oscillation_map(int j) {
  if (j < 1) throw PreconditionError("oscillation index must be >= 1");
  const double omega = 2.0 * M_PI * j;
  SampledForm sf;
  sf.value = [omega](double x) { return x + std::sin(omega * x) / omega; };
  sf.slope = [omega](double x) { return 1.0 + std::cos(omega * x); };
  for (int k = 1; k < 2 * j; ++k) sf.slope_breaks.push_back(static_cast<double>(k) / (2.0 * j));
  sf.min_law_samples = std::max(4096, 1024 * j);
  return PwMap({Segment{Scalar(0), Scalar(1), Scalar(0), Scalar(1), std::move(sf)}});
}

PwMap doubling_exchange(int n) {
  if (n < 1) throw PreconditionError("doubling stage must be >= 1");
  const std::int64_t blocks = std::int64_t(1) << n;
  const std::int64_t half = blocks / 2;
  std::vector<Segment> segs;
  for (std::int64_t k = 0; k < blocks; ++k) {
    const std::int64_t sigma = k < half ? 2 * k : 2 * (k - half) + 1;
    const Scalar a = Scalar::ratio(k, blocks);
    const Scalar b = Scalar::ratio(k + 1, blocks);
    const Scalar ia = Scalar::ratio(sigma, blocks);
    segs.push_back(Segment{a, b, ia, ia + (b - a), LinearForm{Scalar(1)}});
  }
  return PwMap(std::move(segs));
}

double sup_distance(const PwMap& g, const PwMap& h, int samples, bool probe_breakpoints) {
  std::vector<double> probes;
  for (int i = 0; i < samples; ++i) probes.push_back((i + 0.5) / samples);
  probes.push_back(0.0);
  probes.push_back(1.0);
  if (probe_breakpoints) {
    for (const auto& s : g.segments()) {
      probes.push_back(s.x0.value());
      probes.push_back(std::nextafter(s.x1.value(), 0.0));
    }
    for (const auto& s : h.segments()) {
      probes.push_back(s.x0.value());
      probes.push_back(std::nextafter(s.x1.value(), 0.0));
    }
  }
  double sup = 0.0;
  for (double x : probes) {
    if (x < 0.0 || x > 1.0) continue;
    sup = std::max(sup, std::fabs(g.evaluate(x) - h.evaluate(x)));
  }
  return sup;
}

}  // namespace gms
