#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include "psplit/core.hpp"
#include "psplit/io.hpp"
#include "psplit/problems.hpp"
#include "test_helpers.hpp"

using namespace psplit;
using namespace psplit::testing;

TEST_CASE("extrapolate") {
  auto f = scalar_family(1.0);
  SolverState s = make_initial_state(make_point(vec1(1), {vec1(0)}));

  SUBCASE("no inertia reproduces the current point") {
    s.p_curr = make_point(vec1(2), {vec1(3)});
    s.p_prev = make_point(vec1(-1), {vec1(5)});
    auto e = extrapolate(s, 0.0, 0.0, f);
    CHECK(e.p_tilde.z(0) == doctest::Approx(2.0));
    CHECK(e.p_tilde.w[0](0) == doctest::Approx(3.0));
  }
  SUBCASE("scalar substitution") {
    s.p_curr.z = vec1(2);
    s.p_prev.z = vec1(0);
    auto e = extrapolate(s, 0.5, 0.1, f);
    CHECK(e.p_hat.z(0) == doctest::Approx(3.0));
    CHECK(e.p_tilde.z(0) == doctest::Approx(3.2));
  }
  SUBCASE("at k = 0 all differences vanish") {
    auto e = extrapolate(s, 0.9, 2.0, f);
    CHECK(e.p_tilde.z(0) == doctest::Approx(1.0));
    CHECK(e.p_tilde.w[0](0) == doctest::Approx(0.0));
    CHECK(e.w_tilde_n(0) == doctest::Approx(0.0));
  }
}

TEST_CASE("error criterion") {
  SUBCASE("exact triple passes at sigma = 0") {
    BlockTriple t{vec1(2), vec1(0), 0.0, 1.0};
    auto r = error_criterion(t, vec1(2), vec1(0), 0.0);
    CHECK(r.lhs == doctest::Approx(0.0));
    CHECK(r.ok);
  }
  SUBCASE("scalar substitution") {
    BlockTriple t{vec1(1), vec1(1.2), 0.0, 1.0};
    auto r = error_criterion(t, vec1(2), vec1(0), 0.5);
    CHECK(r.lhs == doctest::Approx(0.04));
    CHECK(r.rhs == doctest::Approx(0.25 * 2.44));
    CHECK(r.ok);
    // The criterion turns on sigma^2 >= lhs / 2.44.
    auto tight = error_criterion(t, vec1(2), vec1(0), 0.128);
    CHECK_FALSE(tight.ok);
    auto loose = error_criterion(t, vec1(2), vec1(0), 0.129);
    CHECK(loose.ok);
  }
  SUBCASE("large eps fails for any sigma < 1") {
    BlockTriple t{vec1(1), vec1(1.2), 2.0, 1.0};
    auto r = error_criterion(t, vec1(2), vec1(0), 0.999);
    CHECK(r.lhs == doctest::Approx(4.04));
    CHECK_FALSE(r.ok);
  }
}

TEST_CASE("exact prox inner") {
  SUBCASE("zero operator passes the target through") {
    OperatorBlock b{zero_operator(), std::nullopt};
    auto t = exact_prox_inner(b, 2.0, vec1(1), vec1(3));
    CHECK(t.x(0) == doctest::Approx(7.0));
    CHECK(t.y.norm() == doctest::Approx(0.0));
  }
  SUBCASE("soft threshold") {
    OperatorBlock b{l1_subdifferential(1.0), std::nullopt};
    auto t = exact_prox_inner(b, 1.0, vec1(2), vec1(0));
    CHECK(t.x(0) == doctest::Approx(1.0));
    CHECK(t.y(0) == doctest::Approx(1.0));
    auto r = error_criterion(t, vec1(2), vec1(0), 0.0);
    CHECK(r.lhs <= 1e-12);
    CHECK(r.ok);
  }
  SUBCASE("missing resolvent is a contract error") {
    OperatorBlock b;
    CHECK_THROWS_AS(exact_prox_inner(b, 1.0, vec1(0), vec1(0)), ContractError);
  }
}

TEST_CASE("return condition") {
  auto f = scalar_family(2.0);
  SUBCASE("consistent solution triples trigger at rho = 0") {
    Vec z = vec1(0.7), w1 = vec1(-0.3);
    std::vector<BlockTriple> ts = {{vec1(1.4), w1, 0.0, 1.0},
                                   {z, vec1(0.6), 0.0, 1.0}};
    auto c = return_condition(ts, f, 0.0);
    CHECK(c.triggered);
    CHECK(c.res.dual == doctest::Approx(0.0));
  }
  SUBCASE("scalar instance at rho = 0.1") {
    std::vector<BlockTriple> ts = {{vec1(0.5), vec1(1), 0.1, 1.0},
                                   {vec1(0.5), vec1(-1), 0.1, 1.0}};
    CHECK_FALSE(return_condition(ts, f, 0.1).triggered);
    CHECK(return_condition(ts, f,
                           std::numeric_limits<double>::infinity())
              .triggered);
  }
}

TEST_CASE("config validation") {
  SolverConfig cfg;
  cfg.validate();
  cfg.sigma = 1.0;
  CHECK_THROWS_AS(cfg.validate(), DimensionError);
  cfg.sigma = 0.0;
  cfg.gamma = 0.0;
  CHECK_THROWS_AS(cfg.validate(), DimensionError);
  cfg.gamma = 1.0;
  cfg.lambda_hi = 0.5;
  CHECK_THROWS_AS(cfg.validate(), DimensionError);
  cfg.lambda_hi = 1.0;
  cfg.lambda_rule = [](int, int) { return 2.0; };
  CHECK_THROWS_AS(cfg.lambda(0, 0), DimensionError);
}

TEST_CASE("solver returns immediately from an oracle solution") {
  auto prob = make_affine_feasibility(6, 21);
  REQUIRE(prob.oracle.has_point());
  ProductPoint p0;
  p0.z = *prob.oracle.z_star;
  p0.w = *prob.oracle.w_star;
  SolverConfig cfg;
  cfg.sigma = 0.0;
  cfg.alpha = zero_schedule();
  cfg.beta = zero_schedule();
  cfg.rho_tol = 1e-10;
  auto res = solve(prob, cfg, make_exact_inner(), p0);
  CHECK(res.status == SolveStatus::Returned);
  CHECK(res.iterations == 0);
  CHECK(res.final_residuals.dual <= 1e-10);
  CHECK(res.final_residuals.primal_max() <= 1e-10);
}

TEST_CASE("solve reaches the best approximation on affine feasibility") {
  auto prob = make_affine_feasibility(6, 3);
  SplitMix64 rng(99);
  ProductPoint p0 = random_point(prob.family, rng);
  GammaMetric m(1.0);
  ProductPoint target = prob.oracle.project_se(p0);

  SolverConfig cfg;
  cfg.sigma = 0.0;
  cfg.rho_tol = 0.0;
  cfg.max_iter = 4000;

  SUBCASE("plain run") {
    cfg.alpha = zero_schedule();
    cfg.beta = zero_schedule();
    auto res = solve(prob, cfg, make_exact_inner(), p0);
    CHECK(gamma_norm(res.p_final - target, m) <= 1e-4);
  }
  SUBCASE("inertial run converges to the same point") {
    // The harmonic beta term re-anchors trial points to p0, which slows the
    // tail to O(d0 beta_k); the limit is unchanged.
    cfg.alpha = constant_alpha(0.3);
    cfg.beta = harmonic_beta(1.0);
    auto res = solve(prob, cfg, make_exact_inner(), p0);
    CHECK(gamma_norm(res.p_final - target, m) <= 5e-3);
  }
  SUBCASE("alpha-only inertia keeps the fast tail") {
    cfg.alpha = constant_alpha(0.3);
    cfg.beta = zero_schedule();
    auto res = solve(prob, cfg, make_exact_inner(), p0);
    CHECK(gamma_norm(res.p_final - target, m) <= 1e-4);
  }
}

TEST_CASE("inner-solver contract violations abort") {
  auto prob = make_affine_feasibility(4, 5);
  SplitMix64 rng(1);
  ProductPoint p0 = random_point(prob.family, rng);
  SolverConfig cfg;
  cfg.sigma = 0.0;
  InnerSolver broken = [](const OperatorBlock&, const BlockWork& w) {
    BlockTriple t;
    t.x = w.target_z;
    t.y = Vec::Ones(w.target_z.size());  // not a graph point of T
    t.eps = 5.0;
    t.lambda = w.lambda;
    return t;
  };
  CHECK_THROWS_AS(solve(prob, cfg, broken, p0), ContractError);

  SUBCASE("errors propagate out of the parallel block loop") {
    cfg.parallel_blocks = true;
    CHECK_THROWS_AS(solve(prob, cfg, broken, p0), ContractError);
    InnerSolver throwing = [](const OperatorBlock&,
                              const BlockWork&) -> BlockTriple {
      throw std::runtime_error("inner oracle failure");
    };
    CHECK_THROWS_AS(solve(prob, cfg, throwing, p0), std::runtime_error);
  }
}

TEST_CASE("golden trace is reproduced bit for bit") {
  auto prob = make_affine_feasibility(4, 7);
  ProductPoint p0 = ProductPoint::zero(prob.family);
  p0.z = Vec::Ones(4);
  SolverConfig cfg;
  cfg.sigma = 0.0;
  cfg.alpha = constant_alpha(0.3);
  cfg.beta = harmonic_beta(1.0);
  cfg.rho_tol = 1e-9;
  cfg.max_iter = 8;
  auto res = solve(prob, cfg, make_exact_inner(), p0);
  std::string got = trace_to_csv(res.trace);

  const std::string golden_path =
      std::string(PSPLIT_TEST_DIR) + "/golden/affine_trace.csv";
  std::ifstream in(golden_path, std::ios::binary);
  if (!in) {
    // Bootstrap: write the reference once, then fail so the refresh is
    // noticed and committed.
    std::ofstream out(golden_path, std::ios::binary);
    out << got;
    FAIL("golden file was missing; wrote " << golden_path);
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  CHECK(got == ss.str());
}

TEST_CASE("parallel block solves match the serial reference exactly") {
  auto prob = make_lasso(8, 4, 0.5, 11);
  ProductPoint p0 = ProductPoint::zero(prob.family);
  SolverConfig cfg;
  cfg.sigma = 0.9;
  cfg.rho_tol = 1e-9;
  cfg.max_iter = 300;

  cfg.parallel_blocks = false;
  auto serial = solve(prob, cfg, make_perturbing_inner(42), p0);
  cfg.parallel_blocks = true;
  auto parallel = solve(prob, cfg, make_perturbing_inner(42), p0);

  CHECK(trace_to_csv(serial.trace) == trace_to_csv(parallel.trace));
  CHECK((serial.z - parallel.z).norm() == 0.0);
}

TEST_CASE("perturbing inner solver produces genuine eps > 0") {
  auto prob = make_lasso(8, 4, 0.5, 13);
  ProductPoint p0 = ProductPoint::zero(prob.family);
  SolverConfig cfg;
  cfg.sigma = 0.9;
  cfg.rho_tol = 1e-8;
  cfg.max_iter = 400;

  int eps_positive = 0;
  int fenchel_checked = 0;
  IterationObserver obs = [&](const IterationContext& ctx) {
    const auto& l1 = ctx.triples[0];
    if (l1.eps > 0.0) ++eps_positive;
    if (eps_subdiff_check(*prob.blocks[0].T, l1.x, l1.y, l1.eps))
      ++fenchel_checked;
    else
      FAIL("l1 triple failed the Fenchel-Young check");
  };
  auto res = solve(prob, cfg, make_perturbing_inner(7), p0, obs);
  CHECK(eps_positive > 0);
  CHECK(fenchel_checked == static_cast<int>(res.trace.size()));
  // Every record carries a nonnegative criterion slack.
  for (const auto& r : res.trace) CHECK(r.criterion_slack_min >= -1e-12);
}

TEST_CASE("three-block inclusion converges to the common point") {
  // Three affine subspaces through one point, posed as n = 3 with two
  // non-identity maps; exercises the implied dual block with several terms.
  SplitMix64 rng(27);
  const Index dim = 6;
  Vec z_meet = rng.next_gaussian_vec(dim);
  Mat g1 = rng.next_gaussian_mat(4, dim);
  Mat g2 = rng.next_gaussian_mat(5, dim);
  auto f = make_family({g1, g2}, dim);

  auto subspace_cone = [&](const Mat& a, const Vec& b) {
    MonotoneOracle op;
    op.kind = OracleKind::NormalCone;
    Mat gram = a * a.transpose();
    op.resolvent = [a, b, gram](double, const Vec& u) {
      return (u - a.transpose() * gram.llt().solve(a * u - b)).eval();
    };
    return op;
  };
  // Blocks 0 and 1 constrain G_i z through random hyperplane bundles in
  // their own spaces; block 2 pins two coordinates of z directly.
  Mat a1 = rng.next_gaussian_mat(2, 4);
  Mat a2 = rng.next_gaussian_mat(2, 5);
  Mat a3 = Mat::Zero(2, dim);
  a3(0, 0) = 1.0;
  a3(1, 3) = 1.0;
  std::vector<OperatorBlock> blocks;
  blocks.push_back({subspace_cone(a1, a1 * (g1 * z_meet)), std::nullopt});
  blocks.push_back({subspace_cone(a2, a2 * (g2 * z_meet)), std::nullopt});
  blocks.push_back({subspace_cone(a3, a3 * z_meet), std::nullopt});

  SolverConfig cfg;
  cfg.beta = zero_schedule();
  cfg.rho_tol = 1e-6;
  cfg.max_iter = 20000;
  ProductPoint p0;
  p0.z = rng.next_gaussian_vec(dim);
  p0.w = {rng.next_gaussian_vec(4), rng.next_gaussian_vec(5)};
  auto res = solve(f, blocks, cfg, make_exact_inner(), p0);
  CHECK(res.status == SolveStatus::Returned);
  // The constraints admit more than z_meet; check feasibility of the result.
  CHECK((a1 * (g1 * res.z) - a1 * (g1 * z_meet)).norm() <= 1e-5);
  CHECK((a2 * (g2 * res.z) - a2 * (g2 * z_meet)).norm() <= 1e-5);
  CHECK((a3 * res.z - a3 * z_meet).norm() <= 1e-5);
}

TEST_CASE("inexact run passes the post-hoc trace audit") {
  auto prob = make_lasso(8, 4, 0.5, 11);
  SplitMix64 rng(3);
  ProductPoint p0 = random_point(prob.family, rng);
  SolverConfig cfg;
  cfg.sigma = 0.9;
  cfg.rho_tol = 1e-8;
  cfg.max_iter = 1500;
  auto res = solve(prob, cfg, make_perturbing_inner(5), p0);

  AuditInputs in;
  in.n = prob.n();
  in.max_gnorm_sq = prob.family.max_op_norm_sq();
  in.sigma = cfg.sigma;
  in.alpha_bar = cfg.alpha.bound;
  in.beta_bar = cfg.beta.bound;
  in.s_bar = cfg.beta.sq_sum_bound;
  in.d0 = oracle_distance(prob, p0, cfg.metric());
  REQUIRE(in.d0.has_value());
  auto rep = audit_trace(res.trace, in);
  CHECK(rep.clean());
}

TEST_CASE("iteration records carry the audit quantities") {
  auto prob = make_affine_feasibility(5, 9);
  SplitMix64 rng(2);
  ProductPoint p0 = random_point(prob.family, rng);
  SolverConfig cfg;
  cfg.rho_tol = 0.0;
  cfg.max_iter = 50;
  GammaMetric m(cfg.gamma);

  std::vector<double> seen_phi;
  IterationObserver obs = [&](const IterationContext& ctx) {
    seen_phi.push_back(ctx.phi_tilde);
    CHECK(ctx.separator.eval(ctx.p_tilde) == doctest::Approx(ctx.phi_tilde));
    CHECK(ctx.res.dual >= 0.0);
    // p^{k+1} lies in H_k and W_k.
    double tol = 1e-9 * (1.0 + gamma_norm(ctx.p0, m)) *
                 (1.0 + std::sqrt(ctx.separator.grad_norm_sq()));
    CHECK(ctx.separator.eval(ctx.p_next) <= tol);
    CHECK(gamma_inner(ctx.p0 - ctx.p_curr, ctx.p_next - ctx.p_curr, m) <=
          tol * (1.0 + gamma_norm(ctx.p0 - ctx.p_curr, m)));
  };
  auto res = solve(prob, cfg, make_exact_inner(), p0, obs);
  CHECK(res.trace.size() == seen_phi.size());
  for (size_t j = 0; j < res.trace.size(); ++j) {
    CHECK(res.trace[j].k == static_cast<int>(j));
    CHECK(res.trace[j].phi_tilde == doctest::Approx(seen_phi[j]));
    CHECK(res.trace[j].phi_tilde >= -1e-12);
  }
}
