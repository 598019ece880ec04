#include <doctest.h>

#include "psplit/product_space.hpp"
#include "test_helpers.hpp"

using namespace psplit;
using namespace psplit::testing;

TEST_CASE("gamma inner product: direct bilinear form") {
  auto f = scalar_family(1.0);
  auto p = make_point(vec1(1), {vec1(2)});
  auto q = make_point(vec1(3), {vec1(4)});
  CHECK(gamma_inner(p, q, GammaMetric(1.0)) == doctest::Approx(11.0));
  CHECK(gamma_inner(p, q, GammaMetric(2.0)) == doctest::Approx(14.0));
  CHECK(gamma_inner(p, ProductPoint::zero(f), GammaMetric(2.0)) == 0.0);
}

TEST_CASE("gamma inner product: dimension mismatch is structural") {
  auto p = make_point(vec1(1), {vec1(2)});
  auto q = make_point(vec2(1, 2), {vec1(2)});
  CHECK_THROWS_AS(gamma_inner(p, q, GammaMetric(1.0)), DimensionError);
}

TEST_CASE("gamma metric validates its weight") {
  CHECK_THROWS_AS(GammaMetric(0.0), DimensionError);
  CHECK_THROWS_AS(GammaMetric(-1.0), DimensionError);
}

TEST_CASE("implied dual block") {
  SUBCASE("single adjoint term") {
    auto f = scalar_family(2.0);
    auto p = make_point(vec1(0), {vec1(3)});
    CHECK(implied_dual_block(p, f)(0) == doctest::Approx(-6.0));
  }
  SUBCASE("cancellation with two identity maps") {
    auto f = make_family({Mat::Identity(1, 1), Mat::Identity(1, 1)}, 1);
    auto p = make_point(vec1(5), {vec1(1), vec1(-1)});
    CHECK(implied_dual_block(p, f)(0) == doctest::Approx(0.0));
  }
  SUBCASE("zero blocks") {
    auto f = scalar_family(7.0);
    CHECK(implied_dual_block(ProductPoint::zero(f), f).norm() == 0.0);
  }
  SUBCASE("linear in p") {
    auto f = make_family({Mat::Random(3, 2)}, 2);
    SplitMix64 rng(11);
    auto p = random_point(f, rng);
    auto q = random_point(f, rng);
    Vec lhs = implied_dual_block(p + q, f);
    Vec rhs = implied_dual_block(p, f) + implied_dual_block(q, f);
    CHECK((lhs - rhs).norm() <= 1e-12);
    CHECK((implied_dual_block(2.5 * p, f) - 2.5 * implied_dual_block(p, f))
              .norm() <= 1e-12);
  }
}

TEST_CASE("family apply and adjoint") {
  Mat g(1, 2);
  g << 1, 1;
  auto f = make_family({g}, 2);

  SUBCASE("identity convention for the last block") {
    Vec x = vec2(5, -1);
    CHECK((f.apply(1, x) - x).norm() == 0.0);
    CHECK((f.apply_adjoint(1, x) - x).norm() == 0.0);
  }
  SUBCASE("matrix-vector product") {
    CHECK(f.apply(0, vec2(2, 3))(0) == doctest::Approx(5.0));
    Vec u = f.apply_adjoint(0, vec1(3));
    CHECK(u(0) == doctest::Approx(3.0));
    CHECK(u(1) == doctest::Approx(3.0));
  }
  SUBCASE("zero map") {
    auto fz = make_family({Mat::Zero(3, 2)}, 2);
    CHECK(fz.apply(0, vec2(4, 5)).norm() == 0.0);
  }
  SUBCASE("index out of range") {
    CHECK_THROWS_AS(f.apply(2, vec2(0, 0)), DimensionError);
    CHECK_THROWS_AS(f.apply(-1, vec2(0, 0)), DimensionError);
    CHECK_THROWS_AS(f.apply_adjoint(2, vec2(0, 0)), DimensionError);
  }
}

TEST_CASE("adjoint probe on random maps") {
  SplitMix64 rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    Index rows = 1 + static_cast<Index>(rng.next_u64() % 6);
    Index cols = 1 + static_cast<Index>(rng.next_u64() % 6);
    auto f = make_family({rng.next_gaussian_mat(rows, cols)}, cols);
    Vec x = rng.next_gaussian_vec(cols);
    Vec u = rng.next_gaussian_vec(rows);
    double lhs = f.apply(0, x).dot(u);
    double rhs = x.dot(f.apply_adjoint(0, u));
    CHECK(std::abs(lhs - rhs) <= 1e-12 * (1.0 + std::abs(lhs)));
  }
}

TEST_CASE("gamma inner is symmetric, bilinear, positive definite") {
  auto f = make_family({Mat::Random(3, 4), Mat::Random(2, 4)}, 4);
  SplitMix64 rng(7);
  GammaMetric m(0.37);
  for (int trial = 0; trial < 10; ++trial) {
    auto p = random_point(f, rng);
    auto q = random_point(f, rng);
    auto r = random_point(f, rng);
    double t = rng.next_gaussian();
    CHECK(gamma_inner(p, q, m) ==
          doctest::Approx(gamma_inner(q, p, m)).epsilon(1e-12));
    CHECK(gamma_inner(p + (t * q), r, m) ==
          doctest::Approx(gamma_inner(p, r, m) + t * gamma_inner(q, r, m))
              .epsilon(1e-12));
    CHECK(gamma_norm_sq(p, m) >= 0.0);
  }
  CHECK(gamma_norm_sq(ProductPoint::zero(f), m) == 0.0);
}

TEST_CASE("power-iteration norm estimate matches SVD") {
  SplitMix64 rng(91);
  for (int trial = 0; trial < 8; ++trial) {
    Mat a = rng.next_gaussian_mat(5, 4);
    DenseLinearOp op(a);
    double exact = a.jacobiSvd().singularValues()(0);
    CHECK(op.norm_estimate() == doctest::Approx(exact).epsilon(1e-8));
  }
  DenseLinearOp zero(Mat::Zero(3, 3));
  CHECK(zero.norm_estimate() == 0.0);
  DenseLinearOp supplied(Mat::Identity(2, 2), 1.0);
  CHECK(supplied.norm_estimate() == 1.0);
}
