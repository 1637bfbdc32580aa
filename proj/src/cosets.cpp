#include "gms/cosets.hpp"

#include <algorithm>
#include <cmath>

namespace gms {

namespace {

// Strictly increasing derivative branches contribute continuous laws; the
// multiplicity of a value is the number of branch laws alive there.
struct Decomposition {
  std::vector<RMeasure> nu;
  RMeasure nu_inf;
};

std::vector<Scalar> crossing_points(const Polynomial& a, const Polynomial& b, double lo,
                                    double hi) {
  std::vector<Scalar> roots;
  const Polynomial diff = a - b;
  if (diff.is_zero() || diff.degree() <= 0) return roots;
  const int scan = 128;
  double prev_t = lo;
  double prev_v = diff.eval(lo);
  for (int i = 1; i <= scan; ++i) {
    const double t = lo + (hi - lo) * i / scan;
    const double v = diff.eval(t);
    if ((prev_v < 0.0 && v > 0.0) || (prev_v > 0.0 && v < 0.0)) {
      double a0 = prev_t, b0 = t, va = prev_v;
      for (int it = 0; it < 80 && b0 - a0 > 1e-14; ++it) {
        const double m = 0.5 * (a0 + b0);
        const double vm = diff.eval(m);
        if ((va < 0.0) == (vm < 0.0)) {
          a0 = m;
          va = vm;
        } else {
          b0 = m;
        }
      }
      roots.push_back(Scalar(0.5 * (a0 + b0)));
    }
    prev_t = t;
    prev_v = v;
  }
  return roots;
}

std::vector<DensityPiece> merge_pieces(std::vector<DensityPiece> pieces) {
  std::vector<DensityPiece> merged;
  for (auto& p : pieces) {
    if (!merged.empty() && merged.back().hi.value() == p.lo.value() &&
        merged.back().density.equals(p.density, 0.0))
      merged.back().hi = p.hi;
    else
      merged.push_back(std::move(p));
  }
  return merged;
}

Decomposition decompose_map(const PwMap& g) {
  std::vector<RMeasure> branches;
  std::vector<Atom> plateau_atoms;
  for (const auto& s : g.segments()) {
    if (const auto* lin = std::get_if<LinearForm>(&s.form)) {
      plateau_atoms.push_back({lin->slope, s.x1 - s.x0});
    } else if (const auto* qf = std::get_if<QuantileForm>(&s.form)) {
      branches.push_back(
          qf->base.quantile_slice(qf->offset, qf->offset + (s.x1 - s.x0)));
    } else {
      throw PreconditionError(
          "metric invariants need segments with constant or strictly increasing derivative");
    }
  }

  std::vector<Scalar> cuts;
  std::vector<const DensityPiece*> all_pieces;
  for (const auto& b : branches)
    for (const auto& p : b.pieces()) {
      all_pieces.push_back(&p);
      cuts.push_back(p.lo);
      cuts.push_back(p.hi);
    }
  for (std::size_t i = 0; i < all_pieces.size(); ++i) {
    for (std::size_t j = i + 1; j < all_pieces.size(); ++j) {
      const double lo = std::max(all_pieces[i]->lo.value(), all_pieces[j]->lo.value());
      const double hi = std::min(all_pieces[i]->hi.value(), all_pieces[j]->hi.value());
      if (hi - lo < 1e-14) continue;
      for (const auto& r :
           crossing_points(all_pieces[i]->density, all_pieces[j]->density, lo, hi))
        cuts.push_back(r);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(),
                         [](const Scalar& a, const Scalar& b) { return a.value() == b.value(); }),
             cuts.end());

  std::vector<std::vector<DensityPiece>> layers;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double mid = 0.5 * (cuts[i].value() + cuts[i + 1].value());
    std::vector<const Polynomial*> active;
    for (const auto* p : all_pieces)
      if (p->lo.value() < mid && mid <= p->hi.value()) active.push_back(&p->density);
    if (active.empty()) continue;
    std::sort(active.begin(), active.end(),
              [mid](const Polynomial* a, const Polynomial* b) { return a->eval(mid) > b->eval(mid); });
    if (layers.size() < active.size()) layers.resize(active.size());
    for (std::size_t j = 0; j < active.size(); ++j)
      layers[j].push_back({cuts[i], cuts[i + 1], *active[j]});
  }

  Decomposition d;
  for (auto& layer : layers) d.nu.emplace_back(std::vector<Atom>{}, merge_pieces(std::move(layer)));
  d.nu_inf = RMeasure(std::move(plateau_atoms), {});
  return d;
}

}  // namespace

double RokhlinInvariants::Fn(int n, double y) const {
  if (n <= 0 || partial.empty()) return 0.0;
  const int idx = std::min<int>(n, static_cast<int>(partial.size())) - 1;
  return partial[idx].cdf(y);
}

RMeasure CanonicalLabel::total() const {
  RMeasure t = nu_inf;
  for (const auto& m : nu) t = t + m;
  return t;
}

bool CanonicalLabel::equals(const CanonicalLabel& other, double tol) const {
  auto effective_depth = [tol](const CanonicalLabel& l) {
    std::size_t k = l.nu.size();
    while (k > 0 && l.nu[k - 1].mass().value() <= tol) --k;
    return k;
  };
  const std::size_t ka = effective_depth(*this);
  const std::size_t kb = effective_depth(other);
  if (ka != kb) return false;
  for (std::size_t j = 0; j < ka; ++j)
    if (nu[j].cdf_sup_distance(other.nu[j]) > tol) return false;
  if (!nu_inf.same_atoms(other.nu_inf, tol)) return false;
  return nu_inf.cdf_sup_distance(other.nu_inf) <= tol;
}

RokhlinInvariants rokhlin_invariants(const PwMap& g) {
  const Decomposition d = decompose_map(g);
  RokhlinInvariants inv;
  RMeasure running;
  for (const auto& layer : d.nu) {
    running = running + layer;
    inv.partial.push_back(running);
  }
  inv.full = running + d.nu_inf;
  return inv;
}

CanonicalLabel canonical_form(const PwMap& g) {
  const Decomposition d = decompose_map(g);
  return CanonicalLabel{d.nu, d.nu_inf};
}

CanonicalLabel label_from_invariants(const RokhlinInvariants& inv) {
  CanonicalLabel label;
  RMeasure prev;
  for (std::size_t n = 0; n < inv.partial.size(); ++n) {
    if (!inv.partial[n].is_continuous())
      throw ValidationError("invariant F_" + std::to_string(n + 1) +
                            " must come from a continuous measure");
    RMeasure layer;
    try {
      layer = inv.partial[n].minus(prev);
    } catch (const ValidationError&) {
      throw ValidationError("invariants violate monotonicity: F_" + std::to_string(n + 1) +
                            " < F_" + std::to_string(n));
    }
    if (n > 0) {
      // Layer measures must not increase with the multiplicity index.
      try {
        label.nu.back().minus(layer, 1e-10);
      } catch (const ValidationError&) {
        throw ValidationError("invariants violate layer ordering: F_" + std::to_string(n + 1) +
                              " - F_" + std::to_string(n) + " exceeds F_" + std::to_string(n) +
                              " - F_" + std::to_string(n - 1));
      }
    }
    label.nu.push_back(layer);
    prev = inv.partial[n];
  }
  try {
    label.nu_inf = inv.full.minus(prev);
  } catch (const ValidationError&) {
    throw ValidationError("invariants violate dominance: F_" +
                          std::to_string(inv.partial.size()) + " exceeds F");
  }
  return label;
}

RokhlinInvariants invariants_from_label(const CanonicalLabel& label) {
  RokhlinInvariants inv;
  RMeasure running;
  for (std::size_t j = 0; j < label.nu.size(); ++j) {
    if (!label.nu[j].is_continuous())
      throw ValidationError("label layer " + std::to_string(j + 1) + " must be continuous");
    if (j > 0) {
      try {
        label.nu[j - 1].minus(label.nu[j], 1e-10);
      } catch (const ValidationError&) {
        throw ValidationError("label layers must be nonincreasing: layer " +
                              std::to_string(j + 1) + " exceeds layer " + std::to_string(j));
      }
    }
    running = running + label.nu[j];
    inv.partial.push_back(running);
  }
  inv.full = running + label.nu_inf;
  return inv;
}

bool same_double_coset(const PwMap& g, const PwMap& h, double tol) {
  return canonical_form(g).equals(canonical_form(h), tol);
}

double rokhlin_triple_min(const RokhlinInvariants& inv, int grid_points) {
  if (inv.depth() < 3) return 0.0;
  double lo = 1e300, hi = 0.0;
  if (auto b = inv.full.support_bounds()) {
    lo = b->first;
    hi = b->second;
  } else {
    return 0.0;
  }
  double worst = 0.0;
  for (int k = 0; k + 2 < inv.depth(); ++k) {
    for (int i = 0; i <= grid_points; ++i) {
      const double y = lo + (hi - lo) * i / grid_points;
      const double v = inv.Fn(k + 1, y) - 2.0 * inv.Fn(k + 2, y) + inv.Fn(k + 3, y);
      worst = std::min(worst, v);
    }
  }
  return worst;
}

SpaceDescription canonical_space_description(const CanonicalLabel& label, int block_level) {
  SpaceDescription d;
  d.block_level = block_level;
  const std::int64_t den = std::int64_t(1) << block_level;
  for (std::int64_t k = 1; k < den; ++k) d.block_cuts.push_back(Scalar::ratio(k, den - k));
  for (std::size_t j = 0; j < label.nu.size(); ++j) {
    if (label.nu[j].is_zero()) continue;
    SpaceComponent c;
    c.product = false;
    c.index = static_cast<int>(j + 1);
    c.measure = label.nu[j];
    c.mass = label.nu[j].mass().value();
    c.t_mass = label.nu[j].moment().value();
    d.components.push_back(std::move(c));
  }
  if (!label.nu_inf.is_zero()) {
    SpaceComponent c;
    c.product = true;
    c.index = 0;
    c.measure = label.nu_inf;
    c.mass = label.nu_inf.mass().value();
    c.t_mass = label.nu_inf.moment().value();
    d.components.push_back(std::move(c));
  }
  for (const auto& c : d.components) {
    d.total_mass += c.mass;
    d.total_t_mass += c.t_mass;
  }
  return d;
}

}  // namespace gms
