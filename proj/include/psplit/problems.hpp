#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>

#include "psplit/variants.hpp"

namespace psplit {

// Ground truth independent of the solver code path: closed forms, dense
// linear algebra, exhaustive active-set enumeration, or a high-accuracy
// reference method of a different family.
struct SolutionOracle {
  std::optional<Vec> z_star;
  std::optional<std::vector<Vec>> w_star;  // dual certificates w_i*, i < n
  // Projection of a point onto the extended-solution set (gamma-metric);
  // null when S_e is not computable.
  std::function<ProductPoint(const ProductPoint&)> project_se;

  bool has_point() const { return z_star.has_value() && w_star.has_value(); }
  bool has_projection() const { return static_cast<bool>(project_se); }
};

struct GenParams {
  std::string kind;  // affine | lasso | fused | skew
  int dim = 0;
  int rows = 0;
  int cols = 0;
  double mu = 0.0;
  std::uint64_t seed = 0;
};

struct ProblemInstance {
  GenParams params;
  LinearOpFamily family;
  std::vector<OperatorBlock> blocks;
  SolutionOracle oracle;
  // Realized dense data and per-block operator tags, for serialization and
  // external consumption.
  std::vector<std::pair<std::string, Mat>> data;
  std::vector<std::string> block_tags;

  int n() const { return family.n(); }
};

// Two normal cones of random affine subspaces through a common point;
// S_e is affine, so its projection and d_{0,gamma} are closed-form.
ProblemInstance make_affine_feasibility(int dim, std::uint64_t seed);

// min mu ||z||_1 + 0.5 ||A z - b||^2 with G_1 = I; the quadratic block
// carries both an exact affine resolvent and a cocoercive split.
ProblemInstance make_lasso(int rows, int cols, double mu, std::uint64_t seed);

// min mu ||D z||_1 + 0.5 ||A z - b||^2 with G_1 = D the first-difference
// map; exercises G != I. Oracle present when A has full column rank.
ProblemInstance make_fused(int rows, int cols, double mu, std::uint64_t seed);

// Box variational inequality with a skew-symmetric linear map: Lipschitz but
// not cocoercive, the Tseng case. Oracle by active-set enumeration (dim <= 8).
ProblemInstance make_skew_saddle(int dim, std::uint64_t seed);

ProblemInstance make_problem(const GenParams& p);

// Distance of p0 to S_e when the projection oracle exists.
std::optional<double> oracle_distance(const ProblemInstance& prob,
                                      const ProductPoint& p0,
                                      const GammaMetric& m);

// Consistent triples (x_i, y_i, 0) = (G_i z, w_i, 0) at a point of S_e.
std::vector<BlockTriple> consistent_triples(const ProblemInstance& prob,
                                            const Vec& z,
                                            const std::vector<Vec>& w,
                                            double lambda = 1.0);

bool supports_variant(const ProblemInstance& prob, VariantKind kind);
// Randomized audit of the declared moduli of all split blocks under the
// variant's regularity requirement.
ModulusAudit audit_variant_regularity(const ProblemInstance& prob,
                                      VariantKind kind, int pairs,
                                      std::uint64_t seed);

SolveResult solve(const ProblemInstance& prob, const SolverConfig& cfg,
                  const InnerSolver& inner, const ProductPoint& p0,
                  const IterationObserver& observer = {});

// ---- reference methods backing the oracles (exposed for tests) -----------

// Proximal-gradient run for the lasso objective, to fixed-point tolerance.
Vec lasso_reference(const Mat& a, const Vec& b, double mu, double tol = 1e-12,
                    int max_iter = 1000000);

// Projected-gradient ascent on the box-constrained dual of the fused
// objective; returns (z*, u*) with u* the dual certificate.
std::pair<Vec, Vec> fused_reference(const Mat& a, const Vec& b, const Mat& d,
                                    double mu, double tol = 1e-13,
                                    int max_iter = 1000000);

// Solutions of 0 in M z + N_box(z) by enumeration of active sets. Patterns
// whose linear part is consistent but rank deficient contribute their
// min-norm representative and raise the manifold flag.
struct BoxVIEnumeration {
  std::vector<Vec> solutions;
  bool manifold = false;
  bool unique() const { return !manifold && solutions.size() == 1; }
};
BoxVIEnumeration box_vi_solutions(const Mat& m, const Vec& lo, const Vec& hi);

}  // namespace psplit
