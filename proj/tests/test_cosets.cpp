#include <doctest.h>

#include <cmath>
#include <random>

#include "gms/cosets.hpp"
#include "gms/examples.hpp"
#include "test_support.hpp"

using namespace gms;

TEST_CASE("invariants of the worked maps") {
  SUBCASE("identity: plateau only") {
    const RokhlinInvariants inv = rokhlin_invariants(identity_map());
    CHECK(inv.depth() == 0);
    CHECK(inv.F(0.5) == 0.0);
    CHECK(inv.F(1.0) == 1.0);
    CHECK(inv.Fn(1, 2.0) == 0.0);
  }

  SUBCASE("parabola: injective derivative, F1 == F") {
    const RokhlinInvariants inv = rokhlin_invariants(parabola_map());
    REQUIRE(inv.depth() == 1);
    for (double y : {0.6, 0.9, 1.2, 1.6})
      CHECK(inv.Fn(1, y) == doctest::Approx(inv.F(y)).epsilon(1e-14));
    CHECK(inv.F(1.0) == doctest::Approx(0.5));
  }

  SUBCASE("two copies: each value attained twice") {
    const RokhlinInvariants inv = rokhlin_invariants(two_copy_map());
    REQUIRE(inv.depth() == 2);
    for (double y : {0.6, 0.9, 1.2, 1.6}) {
      CHECK(inv.Fn(1, y) == doctest::Approx(0.5 * inv.F(y)).epsilon(1e-14));
      CHECK(inv.Fn(2, y) == doctest::Approx(inv.F(y)).epsilon(1e-14));
    }
  }
}

TEST_CASE("canonical labels of the worked maps") {
  SUBCASE("identity: everything in the plateau at t = 1") {
    const CanonicalLabel label = canonical_form(identity_map());
    CHECK(label.nu.empty());
    CHECK(label.nu_inf.same_atoms(unit_atom(), 0.0));
  }

  SUBCASE("piecewise constant derivative lands in the plateau part") {
    const CanonicalLabel label = canonical_form(two_slope_map());
    CHECK(label.nu.empty());
    REQUIRE(label.nu_inf.atoms().size() == 2);
    CHECK(label.nu_inf.atoms()[0].t.value() == 0.5);
    CHECK(label.nu_inf.atoms()[0].mass.value() == 0.5);
    CHECK(label.nu_inf.atoms()[1].t.value() == 1.5);
  }

  SUBCASE("parabola: single continuous layer") {
    const CanonicalLabel label = canonical_form(parabola_map());
    REQUIRE(label.nu.size() == 1);
    CHECK(label.nu_inf.is_zero());
    CHECK(label.nu[0].cdf_sup_distance(centered_uniform()) < 1e-14);
  }

  SUBCASE("two copies: two equal half layers") {
    const CanonicalLabel label = canonical_form(two_copy_map());
    REQUIRE(label.nu.size() == 2);
    const RMeasure half = centered_uniform().scaled(Scalar::ratio(1, 2));
    CHECK(label.nu[0].cdf_sup_distance(half) < 1e-14);
    CHECK(label.nu[1].cdf_sup_distance(half) < 1e-14);
    CHECK(label.nu_inf.is_zero());
  }

  SUBCASE("crossing branch densities split by the pointwise envelope") {
    // Branch A: constant density 1/2 on (1/2, 3/2].  Branch B: density
    // 1/4 + 3 (t-1)^2 there (same mass 1/2 and moment 1/2), crossing A at
    // t = 1 -/+ 1/(2 sqrt 3).
    const RMeasure sigma_a = centered_uniform().scaled(Scalar::ratio(1, 2));
    const RMeasure sigma_b = RMeasure::from_density(
        Scalar::ratio(1, 2), Scalar::ratio(3, 2),
        Polynomial({Scalar::ratio(13, 4), Scalar(-6), Scalar(3)}));  // 1/4 + 3(t-1)^2
    CHECK(sigma_b.mass().value() == 0.5);
    CHECK(sigma_b.moment().value() == 0.5);
    const Scalar half = Scalar::ratio(1, 2);
    const PwMap g =
        PwMap({Segment{Scalar(0), half, Scalar(0), half, QuantileForm{sigma_a, Scalar(0)}},
               Segment{half, Scalar(1), half, Scalar(1), QuantileForm{sigma_b, Scalar(0)}}});

    const CanonicalLabel label = canonical_form(g);
    REQUIRE(label.nu.size() == 2);
    CHECK(label.nu_inf.is_zero());
    CHECK(label.nu[0].cdf_sup_distance(sigma_a + sigma_b) > 0.0);  // proper split
    CHECK((label.nu[0] + label.nu[1]).cdf_sup_distance(sigma_a + sigma_b) < 1e-10);
    CHECK_NOTHROW(label.nu[0].minus(label.nu[1], 1e-10));
    // Densities follow max/min of the branch densities between the crossings.
    auto density_at = [](const RMeasure& m, double t) {
      for (const auto& p : m.pieces())
        if (p.lo.value() < t && t <= p.hi.value()) return p.density.eval(t);
      return 0.0;
    };
    for (double t : {0.6, 0.95, 1.05, 1.45}) {
      const double a = 0.5, b = 0.25 + 3.0 * (t - 1.0) * (t - 1.0);
      CHECK(density_at(label.nu[0], t) == doctest::Approx(std::max(a, b)).epsilon(1e-9));
      CHECK(density_at(label.nu[1], t) == doctest::Approx(std::min(a, b)).epsilon(1e-9));
    }
  }
}

TEST_CASE("label and invariants convert both ways") {
  SUBCASE("roundtrip on the two-copy label") {
    const CanonicalLabel label = canonical_form(two_copy_map());
    const CanonicalLabel back = label_from_invariants(invariants_from_label(label));
    CHECK(back.equals(label, 1e-12));
    const RMeasure half = centered_uniform().scaled(Scalar::ratio(1, 2));
    CHECK(back.nu[0].cdf_sup_distance(half) <= 1e-12);
  }

  SUBCASE("all-zero layers put everything in the plateau measure") {
    RokhlinInvariants inv;
    inv.full = atom_pair();
    const CanonicalLabel label = label_from_invariants(inv);
    CHECK(label.nu.empty());
    CHECK(label.nu_inf.same_atoms(atom_pair(), 0.0));
  }

  SUBCASE("single layer gives F1 == F") {
    CanonicalLabel label;
    label.nu = {centered_uniform()};
    const RokhlinInvariants inv = invariants_from_label(label);
    REQUIRE(inv.depth() == 1);
    for (double y : {0.7, 1.0, 1.4})
      CHECK(inv.Fn(1, y) == doctest::Approx(inv.F(y)).epsilon(1e-14));
  }

  SUBCASE("violations are named") {
    RokhlinInvariants bad;
    bad.partial = {centered_uniform()};
    bad.full = centered_uniform().scaled(Scalar::ratio(1, 2));
    CHECK_THROWS_WITH_AS(label_from_invariants(bad), doctest::Contains("dominance"),
                         ValidationError);

    CanonicalLabel increasing;
    increasing.nu = {centered_uniform().scaled(Scalar::ratio(1, 4)), centered_uniform()};
    CHECK_THROWS_WITH_AS(invariants_from_label(increasing), doctest::Contains("nonincreasing"),
                         ValidationError);

    CanonicalLabel atomic_layer;
    atomic_layer.nu = {unit_atom()};
    CHECK_THROWS_WITH_AS(invariants_from_label(atomic_layer), doctest::Contains("continuous"),
                         ValidationError);
  }
}

TEST_CASE("labels of valid maps are normalized") {
  std::mt19937_64 rng(59);
  for (int i = 0; i < 10; ++i) {
    const CanonicalLabel label =
        canonical_form(convex_section(testsupport::random_normalized_measure(rng, false)));
    const RMeasure total = label.total();
    CHECK(std::fabs(total.mass().value() - 1.0) <= 1e-10);
    CHECK(std::fabs(total.moment().value() - 1.0) <= 1e-10);
  }
}

TEST_CASE("labels are invariant under measure-preserving conjugation") {
  std::mt19937_64 rng(61);
  for (const auto& g : {two_slope_map(), parabola_map(), two_copy_map()}) {
    const CanonicalLabel base = canonical_form(g);
    for (int i = 0; i < 20; ++i) {
      const PwMap u = random_interval_exchange(rng(), 2 + static_cast<int>(rng() % 5));
      const PwMap v = random_interval_exchange(rng(), 2 + static_cast<int>(rng() % 5));
      const CanonicalLabel conj = canonical_form(compose(u, compose(g, v)));
      CHECK(conj.equals(base, 0.0));
    }
  }
}

TEST_CASE("coset membership") {
  CHECK(same_double_coset(two_slope_map(),
                          convex_section(rn_distribution(two_slope_map(), IntervalSet::whole(),
                                                         IntervalSet::whole()))));
  CHECK_FALSE(same_double_coset(parabola_map(), two_copy_map()));

  std::mt19937_64 rng(67);
  const PwMap u = random_interval_exchange(rng(), 5);
  const PwMap v = random_interval_exchange(rng(), 3);
  CHECK(same_double_coset(parabola_map(), compose(u, compose(parabola_map(), v))));
}

TEST_CASE("triple inequality over computed invariants") {
  std::mt19937_64 rng(71);
  CHECK(rokhlin_triple_min(rokhlin_invariants(two_slope_map())) >= -1e-12);
  CHECK(rokhlin_triple_min(rokhlin_invariants(parabola_map())) >= -1e-12);
  CHECK(rokhlin_triple_min(rokhlin_invariants(two_copy_map())) >= -1e-12);
  for (int i = 0; i < 10; ++i) {
    const PwMap g = testsupport::random_exact_map(rng);
    CHECK(rokhlin_triple_min(rokhlin_invariants(g)) >= -1e-12);
  }
}

TEST_CASE("space descriptions") {
  SUBCASE("single line") {
    CanonicalLabel label;
    label.nu = {centered_uniform()};
    const SpaceDescription d = canonical_space_description(label);
    REQUIRE(d.components.size() == 1);
    CHECK_FALSE(d.components[0].product);
    CHECK(d.components[0].mass == 1.0);
    REQUIRE(d.block_cuts.size() == 3);
    CHECK(*d.block_cuts[0].exact() == *Rational::make(1, 3));
  }

  SUBCASE("single product block") {
    CanonicalLabel label;
    label.nu_inf = centered_uniform();
    const SpaceDescription d = canonical_space_description(label);
    REQUIRE(d.components.size() == 1);
    CHECK(d.components[0].product);
    CHECK(d.components[0].mass == 1.0);
    CHECK(d.components[0].t_mass == 1.0);
  }

  SUBCASE("two half lines with split t-masses") {
    CanonicalLabel label;
    label.nu = {centered_uniform().scaled(Scalar::ratio(1, 2)),
                centered_uniform().scaled(Scalar::ratio(1, 2))};
    const SpaceDescription d = canonical_space_description(label);
    REQUIRE(d.components.size() == 2);
    CHECK(d.components[0].mass == 0.5);
    CHECK(d.components[0].t_mass == 0.5);
    CHECK(d.total_mass == 1.0);
    CHECK(d.total_t_mass == 1.0);
  }
}

TEST_CASE("sampled segments are rejected for invariants") {
  CHECK_THROWS_AS(canonical_form(oscillation_map(2)), PreconditionError);
}
