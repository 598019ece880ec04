#include <doctest.h>

#include "psplit/separator.hpp"
#include "test_helpers.hpp"

using namespace psplit;
using namespace psplit::testing;

namespace {

// n = 2 scalar instance with G_1 = 2: x = (0.5, 0.5), y = (1, -1),
// eps = (0.1, 0.1).
std::vector<BlockTriple> scalar_triples() {
  return {{vec1(0.5), vec1(1), 0.1, 1.0}, {vec1(0.5), vec1(-1), 0.1, 1.0}};
}

std::vector<BlockTriple> random_triples(const LinearOpFamily& f,
                                        SplitMix64& rng) {
  std::vector<BlockTriple> ts;
  for (int i = 0; i < f.n(); ++i) {
    BlockTriple t;
    t.x = rng.next_gaussian_vec(f.block_dim(i));
    t.y = rng.next_gaussian_vec(f.block_dim(i));
    t.eps = rng.next_uniform();
    t.lambda = 0.5 + rng.next_uniform();
    ts.push_back(std::move(t));
  }
  return ts;
}

}  // namespace

TEST_CASE("separator gradient and norm on the scalar instance") {
  auto f = scalar_family(2.0);
  auto sep = build_separator(scalar_triples(), f, GammaMetric(1.0));
  CHECK(sep.gradient().z(0) == doctest::Approx(1.0));
  CHECK(sep.gradient().w[0](0) == doctest::Approx(-0.5));
  CHECK(sep.grad_norm_sq() == doctest::Approx(1.25));

  SUBCASE("gamma = 4 scales the z-block by 1/4") {
    auto sep4 = build_separator(scalar_triples(), f, GammaMetric(4.0));
    CHECK(sep4.gradient().z(0) == doctest::Approx(0.25));
    CHECK(sep4.grad_norm_sq() == doctest::Approx(0.5));
  }
}

TEST_CASE("separator evaluation on the scalar instance") {
  auto f = scalar_family(2.0);
  auto sep = build_separator(scalar_triples(), f, GammaMetric(1.0));
  auto p = make_point(vec1(1), {vec1(1)});
  CHECK(sep.eval(p) == doctest::Approx(0.3));
  CHECK(sep.eval_block_form(p, f, scalar_triples()) == doctest::Approx(0.3));
}

TEST_CASE("separator vanishes at consistent solution triples") {
  Mat g = Mat::Random(3, 2);
  auto f = make_family({g}, 2);
  SplitMix64 rng(3);
  Vec z = rng.next_gaussian_vec(2);
  Vec w1 = rng.next_gaussian_vec(3);
  std::vector<BlockTriple> ts(2);
  ts[0] = {f.apply(0, z), w1, 0.0, 1.0};
  ts[1] = {z, -f.apply_adjoint(0, w1), 0.0, 1.0};
  auto sep = build_separator(ts, f, GammaMetric(1.0));
  auto p = make_point(z, {w1});
  CHECK(sep.eval(p) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(sep.grad_norm_sq() == doctest::Approx(0.0));
}

TEST_CASE("zero gradient iff dual sum vanishes and x_i = G_i x_n") {
  auto f = scalar_family(2.0);
  SUBCASE("constructed zero gradient") {
    // x_1 = G_1 x_2 and G_1^* y_1 + y_2 = 0.
    std::vector<BlockTriple> ts = {{vec1(1.0), vec1(0.5), 0.0, 1.0},
                                   {vec1(0.5), vec1(-1.0), 0.0, 1.0}};
    auto sep = build_separator(ts, f, GammaMetric(1.0));
    CHECK(sep.grad_norm_sq() == doctest::Approx(0.0));
  }
  SUBCASE("all y zero with x_i = G_i x_n") {
    std::vector<BlockTriple> ts = {{vec1(2.0), vec1(0.0), 0.0, 1.0},
                                   {vec1(1.0), vec1(0.0), 0.0, 1.0}};
    auto sep = build_separator(ts, f, GammaMetric(1.0));
    CHECK(sep.grad_norm_sq() == doctest::Approx(0.0));
  }
  SUBCASE("either defect makes the gradient nonzero") {
    std::vector<BlockTriple> ts = {{vec1(1.0), vec1(0.5), 0.0, 1.0},
                                   {vec1(0.4), vec1(-1.0), 0.0, 1.0}};
    CHECK(build_separator(ts, f, GammaMetric(1.0)).grad_norm_sq() > 1e-4);
    ts = {{vec1(1.0), vec1(0.5), 0.0, 1.0}, {vec1(0.5), vec1(-0.9), 0.0, 1.0}};
    CHECK(build_separator(ts, f, GammaMetric(1.0)).grad_norm_sq() > 1e-4);
  }
}

TEST_CASE("separator properties on random instances") {
  auto f = make_family({Mat::Random(3, 2), Mat::Random(2, 2)}, 2);
  SplitMix64 rng(13);
  GammaMetric m(0.6);
  auto ts = random_triples(f, rng);
  auto sep = build_separator(ts, f, m);

  SUBCASE("affinity") {
    for (int trial = 0; trial < 20; ++trial) {
      auto p = random_point(f, rng);
      auto q = random_point(f, rng);
      double t = rng.next_uniform(-1.0, 2.0);
      double lhs = sep.eval((t * p) + ((1.0 - t) * q));
      double rhs = t * sep.eval(p) + (1.0 - t) * sep.eval(q);
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
    }
  }
  SUBCASE("gradient consistency in the gamma metric") {
    for (int trial = 0; trial < 20; ++trial) {
      auto p = random_point(f, rng);
      auto q = random_point(f, rng);
      double lhs = sep.eval(p) - sep.eval(q);
      double rhs = gamma_inner(sep.gradient(), p - q, m);
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
    }
  }
  SUBCASE("block form agrees with the collected affine form") {
    for (int trial = 0; trial < 20; ++trial) {
      auto p = random_point(f, rng);
      CHECK(sep.eval(p) ==
            doctest::Approx(sep.eval_block_form(p, f, ts)).epsilon(1e-10));
    }
  }
  SUBCASE("cached norm equals the metric norm of the gradient") {
    CHECK(sep.grad_norm_sq() ==
          doctest::Approx(gamma_norm_sq(sep.gradient(), m)).epsilon(1e-10));
  }
  SUBCASE("finite differences match the gradient") {
    auto p = random_point(f, rng);
    double h = 1e-6;
    // Directional derivative along the metric gradient.
    auto d = random_point(f, rng);
    double fd = (sep.eval(p + (h * d)) - sep.eval(p - (h * d))) / (2.0 * h);
    CHECK(fd == doctest::Approx(gamma_inner(sep.gradient(), d, m))
                    .epsilon(1e-5));
  }
}

TEST_CASE("separator rejects malformed triples") {
  auto f = scalar_family(1.0);
  std::vector<BlockTriple> ts = {{vec1(0), vec1(0), -0.1, 1.0},
                                 {vec1(0), vec1(0), 0.0, 1.0}};
  CHECK_THROWS_AS(build_separator(ts, f, GammaMetric(1.0)), DimensionError);
  ts = {{vec1(0), vec1(0), 0.0, 0.0}, {vec1(0), vec1(0), 0.0, 1.0}};
  CHECK_THROWS_AS(build_separator(ts, f, GammaMetric(1.0)), DimensionError);
  ts = {{vec2(0, 0), vec2(0, 0), 0.0, 1.0}, {vec1(0), vec1(0), 0.0, 1.0}};
  CHECK_THROWS_AS(build_separator(ts, f, GammaMetric(1.0)), DimensionError);
}
