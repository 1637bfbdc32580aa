#pragma once

#include <random>
#include <vector>

#include "gms/examples.hpp"
#include "gms/measure.hpp"
#include "gms/pw_map.hpp"

namespace gms::testsupport {

// Random measure with mass exactly 1 and moment exactly 1, built from dyadic
// data so the whole pipeline stays in rational arithmetic.  The random part
// is scaled to mass 1/2 and lives in (1/4, 7/4); two balancing components of
// masses 1/3 and 1/6 at rho/2 and 2*rho (rho = 2 - 2*moment of the scaled
// part) restore the moment.
inline RMeasure random_normalized_measure(std::mt19937_64& rng, bool continuous_only) {
  std::uniform_int_distribution<int> coarse(8, 56);   // 32nds in (1/4, 7/4)
  std::uniform_int_distribution<int> dens(1, 16);     // 8ths
  std::uniform_int_distribution<int> count(1, 3);

  RMeasure raw;
  const int pieces = count(rng);
  for (int i = 0; i < pieces; ++i) {
    int a = coarse(rng), b = coarse(rng);
    if (a == b) b = a + 1;
    if (a > b) std::swap(a, b);
    raw = raw + RMeasure::from_density(Scalar::ratio(a, 32), Scalar::ratio(b, 32),
                                       Polynomial::constant(Scalar::ratio(dens(rng), 8)));
  }
  if (!continuous_only) {
    const int atoms = count(rng) - 1;
    for (int i = 0; i < atoms; ++i)
      raw = raw + RMeasure::point_mass(Scalar::ratio(coarse(rng), 32),
                                       Scalar::ratio(dens(rng), 16));
  }

  const Scalar m0 = raw.mass();
  RMeasure scaled = raw.scaled(Scalar::ratio(1, 2) / m0);
  const Scalar m1 = scaled.moment();                  // in [1/8, 7/8]
  const Scalar rho = Scalar(2) - Scalar(2) * m1;
  const Scalar ta = rho / Scalar(2);
  const Scalar tb = Scalar(2) * rho;
  const Scalar ma = Scalar::ratio(1, 3);
  const Scalar mb = Scalar::ratio(1, 6);
  if (continuous_only) {
    const Scalar w = Scalar::ratio(1, 32);
    auto bump = [&w](const Scalar& center, const Scalar& mass) {
      return RMeasure::from_density(center - w / Scalar(2), center + w / Scalar(2),
                                    Polynomial::constant(mass / w));
    };
    return scaled + bump(ta, ma) + bump(tb, mb);
  }
  return scaled + RMeasure::point_mass(ta, ma) + RMeasure::point_mass(tb, mb);
}

// Random member of the closed-form class: a convex section of a random law,
// conjugated by random interval exchanges.
inline PwMap random_exact_map(std::mt19937_64& rng, bool piecewise_linear_only = false) {
  const RMeasure nu = piecewise_linear_only
                          ? [&rng] {
                              RMeasure m;
                              std::uniform_int_distribution<int> coarse(8, 56);
                              std::uniform_int_distribution<int> dens(1, 16);
                              const int atoms = 1 + static_cast<int>(rng() % 3);
                              for (int i = 0; i < atoms; ++i)
                                m = m + RMeasure::point_mass(Scalar::ratio(coarse(rng), 32),
                                                             Scalar::ratio(dens(rng), 16));
                              const Scalar m0 = m.mass();
                              RMeasure scaled = m.scaled(Scalar::ratio(1, 2) / m0);
                              const Scalar rho = Scalar(2) - Scalar(2) * scaled.moment();
                              return scaled +
                                     RMeasure::point_mass(rho / Scalar(2), Scalar::ratio(1, 3)) +
                                     RMeasure::point_mass(Scalar(2) * rho, Scalar::ratio(1, 6));
                            }()
                          : random_normalized_measure(rng, false);
  const PwMap psi = convex_section(nu);
  const PwMap u = random_interval_exchange(rng(), 2 + static_cast<int>(rng() % 5));
  const PwMap v = random_interval_exchange(rng(), 2 + static_cast<int>(rng() % 5));
  return compose(u, compose(psi, v));
}

inline IntervalSet random_dyadic_set(std::mt19937_64& rng, int level = 3) {
  std::vector<std::pair<Scalar, Scalar>> parts;
  const std::int64_t cells = std::int64_t(1) << level;
  for (std::int64_t k = 0; k < cells; ++k) {
    if (rng() % 2 == 0)
      parts.emplace_back(Scalar::ratio(k, cells), Scalar::ratio(k + 1, cells));
  }
  if (parts.empty()) parts.emplace_back(Scalar(0), Scalar::ratio(1, cells));
  return IntervalSet(std::move(parts));
}

}  // namespace gms::testsupport
