#include <doctest.h>

#include <cmath>
#include <random>

#include "gms/examples.hpp"
#include "gms/pw_map.hpp"
#include "test_support.hpp"

using namespace gms;

namespace {

// Brute-force derivative-law oracle: empirical cdf of g' under uniform
// sampling of the domain region.
double empirical_cdf_gap(const PwMap& g, const RMeasure& law, int n_samples,
                         std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> values(n_samples);
  for (int i = 0; i < n_samples; ++i) values[i] = g.derivative(unif(rng));
  std::sort(values.begin(), values.end());
  double gap = 0.0;
  for (int i = 0; i < n_samples; ++i) {
    const double ecdf = (i + 1.0) / n_samples;
    gap = std::max(gap, std::fabs(ecdf - law.cdf(values[i])));
  }
  return gap;
}

}  // namespace

TEST_CASE("evaluation and derivatives of the worked maps") {
  const PwMap id = identity_map();
  CHECK(id.evaluate(0.37) == 0.37);
  CHECK(id.derivative(0.37) == 1.0);

  const PwMap g0 = two_slope_map();
  CHECK(g0.evaluate(0.75) == 0.625);
  CHECK(g0.derivative(0.25) == 0.5);
  CHECK(g0.derivative(0.75) == 1.5);

  const PwMap psi = parabola_map();
  for (double x : {0.1, 0.25, 0.5, 0.75, 0.9}) {
    CHECK(psi.evaluate(x) == doctest::Approx(x * x / 2 + x / 2).epsilon(1e-12));
    CHECK(psi.derivative(x) == doctest::Approx(x + 0.5).epsilon(1e-12));
  }
  CHECK(psi.evaluate(1.0) == 1.0);

  CHECK_THROWS_AS(id.evaluate(1.5), PreconditionError);
}

TEST_CASE("inversion") {
  const PwMap inv = two_slope_map().inverted();
  REQUIRE(inv.segments().size() == 2);
  CHECK(std::get<LinearForm>(inv.segments()[0].form).slope.value() == 2.0);
  CHECK(std::get<LinearForm>(inv.segments()[1].form).slope.value() ==
        doctest::Approx(2.0 / 3.0).epsilon(1e-16));

  SUBCASE("composition with the inverse is the identity") {
    for (const auto& g : {two_slope_map(), parabola_map(), two_copy_map()}) {
      const PwMap round = compose(g, g.inverted());
      CHECK(sup_distance(round, identity_map()) < 1e-10);
      const PwMap round2 = compose(g.inverted(), g);
      CHECK(sup_distance(round2, identity_map()) < 1e-10);
    }
  }
}

TEST_CASE("composition refines pieces via the chain rule") {
  const PwMap g0 = two_slope_map();
  const PwMap gg = compose(g0, g0);

  // Hand refinement: slope 1/4 on [0,1/2), 3/4 on [1/2,2/3), 9/4 on [2/3,1).
  const RMeasure law = rn_distribution(gg, IntervalSet::whole(), IntervalSet::whole());
  REQUIRE(law.atoms().size() == 3);
  CHECK(law.atoms()[0].t.value() == 0.25);
  CHECK(law.atoms()[0].mass.value() == 0.5);
  CHECK(law.atoms()[1].t.value() == 0.75);
  CHECK(exactly_equal(law.atoms()[1].mass, Scalar::ratio(1, 6)));
  CHECK(law.atoms()[2].t.value() == 2.25);
  CHECK(exactly_equal(law.atoms()[2].mass, Scalar::ratio(1, 3)));
  CHECK(std::fabs(law.mass().value() - 1.0) < 1e-15);
  CHECK(std::fabs(law.moment().value() - 1.0) < 1e-15);

  SUBCASE("pointwise chain rule against direct evaluation") {
    for (double x : {0.1, 0.4, 0.55, 0.62, 0.7, 0.95})
      CHECK(gg.evaluate(x) == doctest::Approx(g0.evaluate(g0.evaluate(x))).epsilon(1e-14));
  }

  SUBCASE("associativity on a mixed triple") {
    std::mt19937_64 rng(17);
    const PwMap u = random_interval_exchange(rng(), 4);
    const PwMap psi = parabola_map();
    const PwMap a = compose(compose(u, psi), g0);
    const PwMap b = compose(u, compose(psi, g0));
    // The two association orders agree almost everywhere; jump locations can
    // differ at rounding level, so compare away from breakpoints.
    CHECK(sup_distance(a, b, 4096, false) < 1e-12);
  }
}

TEST_CASE("derivative laws of the worked maps") {
  const IntervalSet M = IntervalSet::whole();
  const PwMap g0 = two_slope_map();

  SUBCASE("identity gives the unit atom scaled by the overlap") {
    const IntervalSet A = IntervalSet::single(Scalar::ratio(1, 8), Scalar::ratio(5, 8));
    const IntervalSet B = IntervalSet::single(Scalar::ratio(1, 2), Scalar(1));
    const RMeasure law = rn_distribution(identity_map(), A, B);
    REQUIRE(law.atoms().size() == 1);
    CHECK(law.atoms()[0].t.value() == 1.0);
    CHECK(law.atoms()[0].mass.value() == 0.125);
  }

  SUBCASE("two-slope map") {
    const RMeasure law = rn_distribution(g0, M, M);
    REQUIRE(law.atoms().size() == 2);
    CHECK(law.atoms()[0].t.value() == 0.5);
    CHECK(law.atoms()[0].mass.value() == 0.5);
    CHECK(law.atoms()[1].t.value() == 1.5);
    CHECK(law.atoms()[1].mass.value() == 0.5);
    CHECK(law.mass().value() == 1.0);
    CHECK(law.moment().value() == 1.0);

    const RMeasure restricted = rn_distribution(
        g0, IntervalSet::single(Scalar(0), Scalar::ratio(1, 2)),
        IntervalSet::single(Scalar(0), Scalar::ratio(1, 4)));
    REQUIRE(restricted.atoms().size() == 1);
    CHECK(restricted.atoms()[0].t.value() == 0.5);
    CHECK(restricted.atoms()[0].mass.value() == 0.5);
  }

  SUBCASE("parabola law matches the uniform (Monte Carlo oracle)") {
    const RMeasure law = rn_distribution(parabola_map(), M, M);
    CHECK(law.cdf_sup_distance(centered_uniform()) < 1e-12);
    CHECK(empirical_cdf_gap(parabola_map(), law, 1000000, 42) < 3e-3);
  }

  SUBCASE("identity pair over random maps and dyadic sets") {
    std::mt19937_64 rng(23);
    for (int i = 0; i < 40; ++i) {
      const PwMap g = testsupport::random_exact_map(rng);
      const IntervalSet A = testsupport::random_dyadic_set(rng);
      const RMeasure law = rn_distribution(g, A, M);
      CHECK(std::fabs(law.mass().value() - A.measure().value()) <= 1e-12);
      CHECK(std::fabs(law.moment().value() - image_measure(g, A).value()) <= 1e-12);
    }
  }
}

TEST_CASE("inverse law transforms by t -> 1/t with t-weighting") {
  const PwMap g0 = two_slope_map();
  const RMeasure inv_law =
      rn_distribution(g0.inverted(), IntervalSet::whole(), IntervalSet::whole());
  REQUIRE(inv_law.atoms().size() == 2);
  CHECK(inv_law.atoms()[0].t.value() == doctest::Approx(2.0 / 3.0).epsilon(1e-16));
  CHECK(inv_law.atoms()[0].mass.value() == 0.75);
  CHECK(inv_law.atoms()[1].t.value() == 2.0);
  CHECK(inv_law.atoms()[1].mass.value() == 0.25);

  SUBCASE("atom-exact match on random piecewise-linear maps") {
    std::mt19937_64 rng(31);
    const IntervalSet M = IntervalSet::whole();
    for (int i = 0; i < 100; ++i) {
      const PwMap g = testsupport::random_exact_map(rng, /*piecewise_linear_only=*/true);
      const RMeasure law = rn_distribution(g, M, M);
      const RMeasure inv = rn_distribution(g.inverted(), M, M);
      REQUIRE(law.atoms().size() == inv.atoms().size());
      // Expected image: atom (t, m) -> (1/t, m t), re-sorted by location.
      std::vector<Atom> expected;
      for (const auto& a : law.atoms()) expected.push_back({Scalar(1) / a.t, a.mass * a.t});
      const RMeasure image(std::move(expected), {});
      CHECK(inv.same_atoms(image, 1e-14));
    }
  }
}

TEST_CASE("distribution matrices") {
  const auto halves = dyadic_partition(1);

  SUBCASE("identity is diagonal") {
    const DistributionMatrix m = distribution_matrix(identity_map(), halves);
    m.check_constraints();
    CHECK(m.entries[0][1].is_zero());
    CHECK(m.entries[1][0].is_zero());
    CHECK(m.entries[0][0].atoms()[0].mass.value() == 0.5);
  }

  SUBCASE("two-slope worked entries") {
    const DistributionMatrix m = distribution_matrix(two_slope_map(), halves);
    m.check_constraints();
    CHECK(m.entries[0][0].atoms()[0].t.value() == 0.5);
    CHECK(m.entries[0][0].atoms()[0].mass.value() == 0.5);
    CHECK(m.entries[0][1].is_zero());
    CHECK(exactly_equal(m.entries[1][0].atoms()[0].mass, Scalar::ratio(1, 6)));
    CHECK(m.entries[1][0].atoms()[0].t.value() == 1.5);
    CHECK(exactly_equal(m.entries[1][1].atoms()[0].mass, Scalar::ratio(1, 3)));
  }

  SUBCASE("row and column constraints on random maps") {
    std::mt19937_64 rng(37);
    for (int i = 0; i < 10; ++i) {
      const PwMap g = testsupport::random_exact_map(rng);
      distribution_matrix(g, dyadic_partition(2)).check_constraints(1e-12);
    }
  }

  SUBCASE("overlapping partitions are rejected with the pair named") {
    const std::vector<IntervalSet> bad = {
        IntervalSet::single(Scalar(0), Scalar::ratio(3, 4)),
        IntervalSet::single(Scalar::ratio(1, 2), Scalar(1))};
    CHECK_THROWS_WITH_AS(distribution_matrix(identity_map(), bad),
                         doctest::Contains("cells 0 and 1"), ValidationError);
  }
}

TEST_CASE("convex sections") {
  CHECK(sup_distance(convex_section(unit_atom()), identity_map()) == 0.0);

  SUBCASE("atomic law gives the two-slope convex map") {
    const PwMap psi = convex_section(atom_pair());
    REQUIRE(psi.segments().size() == 2);
    CHECK(psi.evaluate(0.75) == 0.5);
    CHECK(std::get<LinearForm>(psi.segments()[0].form).slope.value() ==
          doctest::Approx(2.0 / 3.0));
    CHECK(std::get<LinearForm>(psi.segments()[1].form).slope.value() == 2.0);
  }

  SUBCASE("uniform law gives the parabola") {
    const PwMap psi = convex_section(centered_uniform());
    for (double x : {0.2, 0.5, 0.8})
      CHECK(psi.evaluate(x) == doctest::Approx(x * x / 2 + x / 2).epsilon(1e-14));
  }

  SUBCASE("precondition failures report both residuals") {
    const RMeasure bad = RMeasure::point_mass(Scalar(2));
    CHECK_THROWS_WITH_AS(convex_section(bad), doctest::Contains("residuals"), PreconditionError);
  }

  SUBCASE("roundtrip law -> section -> law is exact on random laws") {
    std::mt19937_64 rng(41);
    const IntervalSet M = IntervalSet::whole();
    const StripGrid grid = StripGrid::standard();
    for (int i = 0; i < 25; ++i) {
      const RMeasure nu = testsupport::random_normalized_measure(rng, false);
      const PwMap psi = convex_section(nu);
      CHECK(measure_distance(rn_distribution(psi, M, M), nu, grid) < 1e-12);
    }
  }

  SUBCASE("uniqueness: section of the law of a convex map returns the map") {
    std::mt19937_64 rng(43);
    const IntervalSet M = IntervalSet::whole();
    for (int i = 0; i < 25; ++i) {
      const PwMap psi = convex_section(testsupport::random_normalized_measure(rng, false));
      const PwMap back = convex_section(rn_distribution(psi, M, M));
      CHECK(sup_distance(psi, back) < 1e-12);
    }
  }

  SUBCASE("section continuity along a converging family") {
    // Laws uniform on (1-w, 1+w] / 2w converge to the centered uniform as
    // w -> 1/2; sections are x + w (x^2 - x), so the sup gap is |w - 1/2|/4.
    const StripGrid grid = StripGrid::standard();
    const PwMap limit = parabola_map();
    double prev_measure = 1e9, prev_sup = 1e9;
    for (int j = 2; j <= 12; ++j) {
      const Scalar w = Scalar::ratio(j - 1, 2 * j);  // (1 - 1/j) / 2
      const RMeasure nu = RMeasure::from_density(
          Scalar(1) - w, Scalar(1) + w, Polynomial::constant(Scalar(1) / (Scalar(2) * w)));
      const double dm = measure_distance(nu, centered_uniform(), grid);
      const double ds = sup_distance(convex_section(nu), limit);
      CHECK(dm < prev_measure);
      CHECK(ds < prev_sup);
      CHECK(ds == doctest::Approx((0.5 - w.value()) / 4.0).epsilon(1e-6));
      prev_measure = dm;
      prev_sup = ds;
    }
  }
}

TEST_CASE("interval exchanges preserve measure and derivative laws") {
  CHECK(is_measure_preserving(identity_map()));
  CHECK_FALSE(is_measure_preserving(two_slope_map()));

  const PwMap swap = PwMap({
      Segment{Scalar(0), Scalar::ratio(1, 2), Scalar::ratio(1, 2), Scalar(1), LinearForm{Scalar(1)}},
      Segment{Scalar::ratio(1, 2), Scalar(1), Scalar(0), Scalar::ratio(1, 2), LinearForm{Scalar(1)}},
  });
  CHECK(is_measure_preserving(swap));

  SUBCASE("random exchanges have slope one everywhere") {
    std::mt19937_64 rng(47);
    for (int i = 0; i < 20; ++i) {
      const PwMap u = random_interval_exchange(rng(), 2 + static_cast<int>(rng() % 8));
      CHECK(is_measure_preserving(u));
      for (const auto& s : u.segments())
        CHECK(std::get<LinearForm>(s.form).slope.value() == 1.0);
    }
  }

  SUBCASE("conjugation leaves the full derivative law unchanged exactly") {
    std::mt19937_64 rng(53);
    const IntervalSet M = IntervalSet::whole();
    for (const auto& g : {two_slope_map(), parabola_map(), two_copy_map()}) {
      const RMeasure base = rn_distribution(g, M, M);
      for (int i = 0; i < 10; ++i) {
        const PwMap u = random_interval_exchange(rng(), 3);
        const PwMap v = random_interval_exchange(rng(), 4);
        const RMeasure law = rn_distribution(compose(u, compose(g, v)), M, M);
        CHECK(law.cdf_sup_distance(base) == 0.0);
      }
    }
  }
}

TEST_CASE("overlapping segment images are rejected with the pair named") {
  CHECK_THROWS_WITH_AS(
      PwMap({Segment{Scalar(0), Scalar::ratio(1, 2), Scalar(0), Scalar::ratio(3, 4),
                     LinearForm{Scalar::ratio(3, 2)}},
             Segment{Scalar::ratio(1, 2), Scalar(1), Scalar::ratio(1, 2), Scalar(1),
                     LinearForm{Scalar(1)}}}),
      doctest::Contains("overlapping images"), ValidationError);
}
