#include "gms/approx.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace gms {

namespace {

// Carves the quantile window of rho whose mass is target_mass and whose
// moment matches target_moment, by bisection over the window position.
struct Carve {
  RMeasure slice;
  RMeasure remainder;
  double q = 0.0;  // left quantile position of the window
};

Carve carve_window(const RMeasure& rho, const Scalar& target_mass, const Scalar& target_moment,
                   double tol) {
  const double tm = target_mass.value();
  const double rho_mass = rho.mass().value();
  if (tm <= 1e-15) return {RMeasure(), rho, 0.0};
  if (tm >= rho_mass - 1e-13) {
    const double resid = std::fabs(rho.moment().value() - target_moment.value());
    if (resid > tol)
      throw NumericError("full-block carve misses the moment target by " + std::to_string(resid));
    return {rho, RMeasure(), 0.0};
  }
  auto window_moment = [&rho, &target_mass](double q) {
    return rho.quantile_slice(Scalar(q), Scalar(q) + target_mass).moment().value();
  };
  const double q_max = rho_mass - tm;
  const double f_lo = window_moment(0.0) - target_moment.value();
  const double f_hi = window_moment(q_max) - target_moment.value();
  if (f_lo > tol || f_hi < -tol) {
    std::ostringstream os;
    os << "moment matching has no bracketing window: endpoint residuals " << f_lo << ", " << f_hi;
    throw NumericError(os.str());
  }
  double lo = 0.0, hi = q_max;
  for (int it = 0; it < 120 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (window_moment(mid) - target_moment.value() > 0.0)
      hi = mid;
    else
      lo = mid;
  }
  const double q = 0.5 * (lo + hi);
  Carve carve;
  carve.q = q;
  carve.slice = rho.quantile_slice(Scalar(q), Scalar(q) + target_mass);
  const double resid = std::fabs(carve.slice.moment().value() - target_moment.value());
  if (resid > tol)
    throw NumericError("moment matching stalled at residual " + std::to_string(resid));
  carve.remainder = rho.quantile_slice(Scalar(0), Scalar(q)) +
                    rho.quantile_slice(Scalar(q) + target_mass, rho.mass());
  return carve;
}

void require_normalized(const RMeasure& nu, const char* who) {
  const auto r = check_normalized(nu);
  if (!r.ok) {
    std::ostringstream os;
    os << who << " needs a law with mass 1 and moment 1: residuals " << r.mass_residual << ", "
       << r.moment_residual;
    throw PreconditionError(os.str());
  }
}

}  // namespace

ValueInterval SplitPartition::block(int k) const {
  const Scalar lo = k == 0 ? Scalar(0) : cuts[k - 1];
  if (k == block_count() - 1) return ValueInterval::above(lo);
  return ValueInterval::bounded(lo, cuts[k]);
}

SplitPartition split_points(int n) {
  if (n < 1) throw PreconditionError("split partition level must be >= 1");
  if (n > 24) throw PreconditionError("split partition level too large");
  SplitPartition p;
  p.level = n;
  const std::int64_t den = std::int64_t(1) << n;
  for (std::int64_t k = 1; k < den; ++k) p.cuts.push_back(Scalar::ratio(k, den - k));
  return p;
}

void BlockMap::check_conservation(double tol) const {
  Scalar mass(0), moment(0);
  for (const auto& comp : components) {
    for (const auto& law : comp.laws) {
      mass += law.mass();
      moment += law.moment();
    }
  }
  if (std::fabs(mass.value() - 1.0) > tol || std::fabs(moment.value() - 1.0) > tol)
    throw ValidationError("block map carries mass " + std::to_string(mass.value()) +
                          " and moment " + std::to_string(moment.value()) +
                          " instead of 1, 1");
}

ValueInterval find_Bk(const RMeasure& nu, const RMeasure& nu1, const ValueInterval& C,
                      double tol) {
  const RMeasure rho = nu.restricted(C);
  const RMeasure rho1 = nu1.restricted(C);
  if (!rho.is_continuous())
    throw PreconditionError("interval matching needs a continuous law on the block");
  try {
    rho.minus(rho1, 1e-10);
  } catch (const ValidationError&) {
    throw PreconditionError("interval matching needs nu1 <= nu on the block");
  }
  const Scalar target_mass = rho1.mass();
  if (target_mass.value() <= 1e-15) return ValueInterval::bounded(C.lo, C.lo);
  if (target_mass.value() >= rho.mass().value() - 1e-13) {
    const auto bounds = rho.support_bounds();
    return ValueInterval::bounded(Scalar(bounds->first), Scalar(bounds->second));
  }
  const Carve carve = carve_window(rho, target_mass, rho1.moment(), tol);
  const Scalar z = rho.quantile_cut(Scalar(carve.q));
  const Scalar z_hi =
      rho.quantile_cut(min(Scalar(carve.q) + target_mass, rho.mass() * Scalar(1.0 - 1e-16)));
  return ValueInterval::bounded(z, z_hi);
}

BlockMap splitting_theta(const RMeasure& nu, const RMeasure& nu1, const RMeasure& nu2, int n) {
  require_normalized(nu, "measure splitting");
  if (!nu.is_continuous())
    throw PreconditionError("measure splitting needs a continuous law");
  if ((nu1 + nu2).cdf_sup_distance(nu) > 1e-10)
    throw PreconditionError("measure splitting needs nu == nu1 + nu2");

  BlockMap bm;
  bm.part = split_points(n);
  BlockComponent line1{false, false, nu1, {}};
  BlockComponent line2{false, false, nu2, {}};
  for (int k = 0; k < bm.part.block_count(); ++k) {
    const ValueInterval C = bm.part.block(k);
    const ValueInterval B = find_Bk(nu, nu1, C);
    const RMeasure inside = nu.restricted(B);
    line1.laws.push_back(inside);
    const RMeasure left = nu.restricted(ValueInterval::bounded(C.lo, B.lo));
    const RMeasure right = C.unbounded
                               ? nu.restricted(ValueInterval::above(B.hi))
                               : nu.restricted(ValueInterval::bounded(B.hi, C.hi));
    line2.laws.push_back(left + right);
  }
  bm.components.push_back(std::move(line1));
  bm.components.push_back(std::move(line2));
  bm.check_conservation();
  return bm;
}

BlockMap spreading_upsilon(const RMeasure& nu, int n) {
  require_normalized(nu, "measure spreading");
  if (!nu.is_continuous())
    throw PreconditionError("measure spreading needs a continuous law");
  BlockMap bm;
  bm.part = split_points(n);
  BlockComponent prod{true, false, nu, {}};
  for (int k = 0; k < bm.part.block_count(); ++k)
    prod.laws.push_back(nu.restricted(bm.part.block(k)));
  bm.components.push_back(std::move(prod));
  bm.check_conservation();
  return bm;
}

BlockMap closure_composer(const RMeasure& nu, const CanonicalLabel& target, int k,
                          int n_override) {
  if (k < 1) throw PreconditionError("composer stage must be >= 1");
  require_normalized(nu, "closure composer");
  RMeasure recombined = target.nu_inf;
  for (const auto& layer : target.nu) recombined = recombined + layer;
  const double gap = recombined.cdf_sup_distance(nu);
  if (gap > 1e-10) {
    std::ostringstream os;
    os << "target label does not sum to the source law: cdf residual " << gap
       << ", mass residual " << (recombined.mass().value() - nu.mass().value())
       << ", moment residual " << (recombined.moment().value() - nu.moment().value());
    throw PreconditionError(os.str());
  }

  const int n = n_override > 0 ? n_override : k + 2;
  const auto [nu_cont, nu_disc] = nu.decomposed();
  const int lines = static_cast<int>(target.nu.size());
  const int carved = std::min(k, lines);

  BlockMap bm;
  bm.part = split_points(n);
  std::vector<BlockComponent> comps(static_cast<std::size_t>(carved), BlockComponent{});
  for (int j = 0; j < carved; ++j) comps[j].target = target.nu[j];
  BlockComponent tail;
  const bool has_tail = carved < lines;
  if (has_tail) {
    tail.lumped = true;
    RMeasure tau;
    for (int j = carved; j < lines; ++j) tau = tau + target.nu[j];
    tail.target = tau;
  }
  BlockComponent prod;
  prod.product = true;
  prod.target = target.nu_inf;

  for (int b = 0; b < bm.part.block_count(); ++b) {
    const ValueInterval C = bm.part.block(b);
    RMeasure rem = nu_cont.restricted(C);
    for (int j = 0; j < carved; ++j) {
      const RMeasure want = target.nu[j].restricted(C);
      Carve carve = carve_window(rem, want.mass(), want.moment(), 1e-10);
      comps[j].laws.push_back(std::move(carve.slice));
      rem = std::move(carve.remainder);
    }
    if (has_tail) {
      const RMeasure want = tail.target.restricted(C);
      Carve carve = carve_window(rem, want.mass(), want.moment(), 1e-10);
      tail.laws.push_back(std::move(carve.slice));
      rem = std::move(carve.remainder);
    }
    if (rem.mass().value() <= 1e-13) rem = RMeasure();
    prod.laws.push_back(rem + nu_disc.restricted(C));
  }

  for (auto& c : comps) bm.components.push_back(std::move(c));
  if (has_tail) bm.components.push_back(std::move(tail));
  const bool product_used =
      !prod.target.is_zero() ||
      std::any_of(prod.laws.begin(), prod.laws.end(),
                  [](const RMeasure& m) { return m.mass().value() > 1e-12; });
  if (product_used) bm.components.push_back(std::move(prod));
  bm.check_conservation();
  return bm;
}

double blockmap_distance(const BlockMap& bm, const StripGrid& strip) {
  const int n = bm.part.level;
  double total = 0.0;
  for (int m = 1; m <= n + 1; ++m) {
    const SplitPartition fine = m <= n ? bm.part : split_points(n + 1);
    const SplitPartition level_m = split_points(m);
    double level_sum = 0.0;
    for (const auto& comp : bm.components) {
      if (m <= n) {
        // Level-m blocks are exact unions of the map's blocks.
        const int fold = 1 << (n - m);
        for (int D = 0; D < level_m.block_count(); ++D) {
          RMeasure model;
          for (int k = D * fold; k < (D + 1) * fold; ++k) model = model + comp.laws[k];
          level_sum += measure_distance(model, comp.target.restricted(level_m.block(D)), strip);
        }
      } else {
        // One refinement below the map's own resolution: within a block the
        // law is decoupled from the position, so a half-block sees the full
        // block law scaled by the half-block's share of the target mass.
        for (int k = 0; k < bm.part.block_count(); ++k) {
          const Scalar block_mass = comp.target.restricted(bm.part.block(k)).mass();
          for (int half = 0; half < 2; ++half) {
            const ValueInterval D = fine.block(2 * k + half);
            const RMeasure target_half = comp.target.restricted(D);
            RMeasure model;
            if (block_mass.value() > 0.0)
              model = comp.laws[k].scaled(target_half.mass() / block_mass);
            level_sum += measure_distance(model, target_half, strip);
          }
        }
      }
    }
    total += std::ldexp(level_sum, -m);
  }
  return total;
}

std::vector<BlockRow> blockmap_rows(const BlockMap& bm, const StripGrid& strip) {
  std::vector<BlockRow> rows;
  for (std::size_t c = 0; c < bm.components.size(); ++c) {
    const auto& comp = bm.components[c];
    for (int k = 0; k < bm.part.block_count(); ++k) {
      BlockRow row{};
      row.block = k;
      row.component = static_cast<int>(c);
      const RMeasure target_block = comp.target.restricted(bm.part.block(k));
      row.mass_residual = comp.laws[k].mass().value() - target_block.mass().value();
      if (auto b = comp.laws[k].support_bounds()) {
        row.support_lo = b->first;
        row.support_hi = b->second;
      }
      row.block_distance = measure_distance(comp.laws[k], target_block, strip);
      rows.push_back(row);
    }
  }
  return rows;
}

PwMap discretize_gms(const PwMap& g, int bins_level) {
  if (!g.exact_class())
    throw PreconditionError("bin discretization needs a map without sampled segments");
  const ValueBinGrid grid{bins_level};
  const RMeasure law = rn_distribution(g, IntervalSet::whole(), IntervalSet::whole());
  const RMeasure binned = bin_discretize(law, grid);

  // Bin barycenters, keyed by bin index.
  std::map<std::int64_t, Scalar> slope_of;
  for (const auto& a : binned.atoms()) slope_of[value_bin_index(a.t, bins_level)] = a.t;

  // Per bin: the domain pieces where the derivative lives in the bin,
  // in domain order, with their image pieces.
  struct Piece {
    Scalar x0, x1, y0, y1;
  };
  std::map<std::int64_t, std::vector<Piece>> bins;
  const Scalar width = Scalar::ratio(1, std::int64_t(1) << bins_level);
  for (const auto& s : g.segments()) {
    if (const auto* lin = std::get_if<LinearForm>(&s.form)) {
      bins[value_bin_index(lin->slope, bins_level)].push_back({s.x0, s.x1, s.y0, s.y1});
    } else {
      const auto& qf = std::get<QuantileForm>(s.form);
      const Scalar len = s.x1 - s.x0;
      const double d_lo = qf.base.quantile(std::min(qf.offset.value(),
                                                    qf.base.mass().value() * (1 - 1e-16)));
      const double d_hi = qf.base.quantile(std::min((qf.offset + len).value(),
                                                    qf.base.mass().value() * (1 - 1e-16)));
      const std::int64_t j_lo = value_bin_index(Scalar(d_lo), bins_level);
      const std::int64_t j_hi = value_bin_index(Scalar(d_hi), bins_level);
      Scalar x_prev = s.x0;
      for (std::int64_t j = j_lo; j <= j_hi; ++j) {
        Scalar x_next = s.x1;
        if (j < j_hi) {
          const Scalar boundary = Scalar(j) * width;
          const Scalar q = qf.base.restricted(ValueInterval::bounded(Scalar(0), boundary)).mass();
          x_next = min(s.x1, s.x0 + (q - qf.offset));
        }
        if (x_next.value() > x_prev.value()) {
          bins[j].push_back(
              {x_prev, x_next, segment_value(s, x_prev), segment_value(s, x_next)});
        }
        x_prev = x_next;
      }
    }
  }

  std::vector<Segment> segs;
  for (auto& [j, pieces] : bins) {
    const Scalar slope = slope_of.at(j);
    std::size_t ai = 0, bi = 0;
    Scalar a_pos = pieces.empty() ? Scalar(0) : pieces[0].x0;
    Scalar b_pos = pieces.empty() ? Scalar(0) : pieces[0].y0;
    while (ai < pieces.size() && bi < pieces.size()) {
      const Scalar a_rem = pieces[ai].x1 - a_pos;
      const Scalar b_rem = (pieces[bi].y1 - b_pos) / slope;
      const Scalar w = min(a_rem, b_rem);
      if (w.value() > 1e-15) {
        segs.push_back(Segment{a_pos, a_pos + w, b_pos, b_pos + w * slope, LinearForm{slope}});
      }
      a_pos += w;
      b_pos += w * slope;
      if ((pieces[ai].x1 - a_pos).value() <= 1e-15) {
        ++ai;
        if (ai < pieces.size()) a_pos = pieces[ai].x0;
      }
      if ((pieces[bi].y1 - b_pos).value() <= 1e-15) {
        ++bi;
        if (bi < pieces.size()) b_pos = pieces[bi].y0;
      }
    }
  }
  return PwMap(std::move(segs), 1e-11);
}

}  // namespace gms
