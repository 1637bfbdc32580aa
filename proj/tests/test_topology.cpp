#include <doctest.h>

#include <cmath>
#include <random>

#include "gms/approx.hpp"
#include "gms/examples.hpp"
#include "gms/topology.hpp"
#include "test_support.hpp"

using namespace gms;

namespace {
GridFunction smooth_test_function(int n, double p) {
  return GridFunction::sample(
      n, [](double x) { return std::sin(2.0 * M_PI * x) + 2.0; }, p);
}
}  // namespace

TEST_CASE("metric basics") {
  GmsMetricConfig cfg;
  cfg.depth = 4;
  CHECK(gms_distance(two_slope_map(), two_slope_map(), cfg) == 0.0);
  CHECK(gms_distance(parabola_map(), parabola_map(), cfg) == 0.0);
  CHECK(gms_distance(two_slope_map(), identity_map(), cfg) > 0.1);

  SUBCASE("symmetry") {
    const double a = gms_distance(two_slope_map(), parabola_map(), cfg);
    const double b = gms_distance(parabola_map(), two_slope_map(), cfg);
    CHECK(a == doctest::Approx(b).epsilon(1e-12));
  }

  SUBCASE("triangle inequality on a worked triple") {
    const PwMap f = identity_map(), g = two_slope_map(), h = parabola_map();
    const double fg = gms_distance(f, g, cfg);
    const double gh = gms_distance(g, h, cfg);
    const double fh = gms_distance(f, h, cfg);
    CHECK(fh <= fg + gh + 1e-12);
  }
}

TEST_CASE("operator application") {
  const int n = 1 << 12;
  const GridFunction f = smooth_test_function(n, 2.0);

  SUBCASE("identity acts trivially") {
    const GridFunction out = operator_apply(identity_map(), f, 2.0, 0.0);
    CHECK(lp_diff_norm(out, f, 2.0) < 1e-12);
  }

  SUBCASE("constant input picks up the slope factor") {
    const GridFunction one = GridFunction::constant(n, 1.0, 2.0);
    const GridFunction out = operator_apply(two_slope_map(), one, 2.0, 0.0);
    CHECK(std::abs(out.values[10] - std::sqrt(0.5)) < 1e-12);
    CHECK(std::abs(out.values[n - 10] - std::sqrt(1.5)) < 1e-12);
  }

  SUBCASE("isometry within grid tolerance") {
    const int big = 1 << 16;
    std::mt19937_64 rng(5);
    for (double p : {1.0, 2.0, 3.0}) {
      for (double s : {0.0, 0.7}) {
        const GridFunction h = smooth_test_function(big, p);
        for (const auto& g : {two_slope_map(), parabola_map(), two_copy_map(),
                              testsupport::random_exact_map(rng)}) {
          CHECK(isometry_defect(g, h, p, s) < 1e-3);
        }
      }
    }
  }
}

TEST_CASE("matrix elements agree along both routes") {
  const IntervalSet M = IntervalSet::whole();

  SUBCASE("identity gives the overlap measure") {
    const IntervalSet A = IntervalSet::single(Scalar(0), Scalar::ratio(3, 4));
    const IntervalSet B = IntervalSet::single(Scalar::ratio(1, 4), Scalar(1));
    const MatrixElement me = matrix_element(identity_map(), A, B, 2.0, 0.3);
    CHECK(std::abs(me.via_law - 0.5) < 1e-12);
    CHECK(me.disagreement < 1e-12);
  }

  SUBCASE("two-slope worked value at p = 2") {
    const MatrixElement me = matrix_element(two_slope_map(), M, M, 2.0, 0.0);
    const double expected = (std::sqrt(2.0) + std::sqrt(6.0)) / 4.0;
    CHECK(std::abs(me.via_law - expected) < 1e-14);
    CHECK(me.disagreement < 1e-14);
  }

  SUBCASE("dual computation within 1e-6 across maps and exponents") {
    std::mt19937_64 rng(7);
    for (const auto& g :
         {parabola_map(), two_copy_map(), testsupport::random_exact_map(rng)}) {
      for (double p : {1.0, 2.0}) {
        for (double s : {0.0, 0.7}) {
          const IntervalSet A = testsupport::random_dyadic_set(rng, 2);
          const IntervalSet B = testsupport::random_dyadic_set(rng, 2);
          CHECK(matrix_element(g, A, B, p, s).disagreement < 1e-6);
        }
      }
    }
  }

  SUBCASE("oscillation maps keep the full moment") {
    for (int j : {1, 4, 16}) {
      const MatrixElement me = matrix_element(oscillation_map(j), M, M, 1.0, 0.0, 1 << 12);
      CHECK(std::abs(me.via_law - 1.0) < 1e-10);
      CHECK(std::abs(me.via_grid - 1.0) < 1e-6);
    }
  }
}

TEST_CASE("weak but not strong convergence of the oscillation family") {
  GmsMetricConfig cfg;
  cfg.depth = 3;
  const auto rows = weak_not_strong_demo(64, cfg, 1 << 14);
  REQUIRE(rows.size() == 7);  // j = 1, 2, 4, ..., 64

  SUBCASE("matrix elements converge to the overlap") {
    CHECK(rows.back().matrix_element_error <= 1e-2);
    CHECK(rows.back().matrix_element_error < rows.front().matrix_element_error);
  }

  SUBCASE("operator distance to the identity stays at 2/pi") {
    for (const auto& row : rows)
      CHECK(row.t1_norm_defect == doctest::Approx(2.0 / M_PI).epsilon(1e-6));
  }

  SUBCASE("metric distance to the identity is bounded away from zero") {
    // The derivative law is the j-independent arcsine-type law of
    // 1 + cos(2 pi u) on (0, 2).  Brute-force quadrature of its
    // characteristic function at z = 1/2 fixes the gap to the unit atom.
    double chi_half = 0.0;
    const int quad_n = 1 << 20;
    for (int i = 0; i < quad_n; ++i)
      chi_half += std::sqrt(1.0 + std::cos(2.0 * M_PI * (i + 0.5) / quad_n)) / quad_n;
    CHECK(chi_half == doctest::Approx(2.0 * std::sqrt(2.0) / M_PI).epsilon(1e-9));
    const double gap_at_half = 1.0 - chi_half;
    for (const auto& row : rows) CHECK(row.gms_to_identity > 0.25 * gap_at_half);
    double lo = 1e9, hi = 0.0;
    for (std::size_t i = 3; i < rows.size(); ++i) {  // j = 8, 16, 32, 64
      lo = std::min(lo, rows[i].gms_to_identity);
      hi = std::max(hi, rows[i].gms_to_identity);
    }
    CHECK(hi - lo <= 1e-3);
  }
}

TEST_CASE("doubling sequence approaches the two-to-one operator") {
  const int n_grid = 1 << 16;
  const GridFunction f = GridFunction::sample(
      n_grid, [](double x) { return std::sin(2.0 * M_PI * x); }, 2.0);
  const auto rows = doubling_closure_demo(10, f, 2.0);
  REQUIRE(rows.size() == 10);
  for (const auto& row : rows) {
    CHECK(row.measure_preserving);
    CHECK(row.sup_to_doubling <= 2.0 * std::ldexp(1.0, -row.n) + 1e-12);
  }
  CHECK(rows[2].sup_to_doubling <= 0.25 + 1e-12);
  for (std::size_t i = 1; i < rows.size(); ++i)
    CHECK(rows[i].operator_gap < rows[i - 1].operator_gap);
  CHECK(rows.back().operator_gap < 1e-2);

  SUBCASE("Lipschitz modulus bound at each stage") {
    const double lip = 2.0 * M_PI;
    for (const auto& row : rows)
      CHECK(row.operator_gap <= lip * 2.0 * std::ldexp(1.0, -row.n) + 1e-3);
  }
}

TEST_CASE("metric convergence transports matrix elements") {
  // Along a sequence converging in the metric, matrix elements over dyadic
  // pairs up to level 3 converge as well.
  GmsMetricConfig cfg;
  cfg.depth = 5;
  const PwMap psi = parabola_map();
  const auto cells = dyadic_partition(3);
  double prev_metric = 1e9, prev_me = 1e9;
  for (int N : {1, 3, 5, 7}) {
    const PwMap gN = discretize_gms(psi, N);
    const double metric = gms_distance(gN, psi, cfg);
    double me_gap = 0.0;
    for (const auto& A : cells) {
      for (const auto& B : cells) {
        const auto a = matrix_element(gN, A, B, 2.0, 0.0, 1 << 10).via_law;
        const auto b = matrix_element(psi, A, B, 2.0, 0.0, 1 << 10).via_law;
        me_gap = std::max(me_gap, std::abs(a - b));
      }
    }
    CHECK(metric < prev_metric);
    CHECK(me_gap < prev_me + 1e-12);
    prev_metric = metric;
    prev_me = me_gap;
  }
  CHECK(prev_me < 1e-2);
}

TEST_CASE("grid functions") {
  const GridFunction f = smooth_test_function(1 << 10, 2.0);
  CHECK(lp_norm(GridFunction::constant(64, 1.0, 2.0), 2.0) == doctest::Approx(1.0));
  CHECK(lp_norm(f, 2.0) == doctest::Approx(std::sqrt(4.5)).epsilon(1e-4));
  CHECK_THROWS_AS(operator_apply(identity_map(), f, 0.5, 0.0), PreconditionError);
}
