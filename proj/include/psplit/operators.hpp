#pragma once

#include <cstdint>
#include <functional>
#include <optional>

#include "psplit/types.hpp"

namespace psplit {

enum class OracleKind { Subdifferential, NormalCone, Affine, Custom };

// f and its Fenchel conjugate, for subdifferential operators T = df. Values
// may be +infinity (indicator-style conjugates).
struct ConjugatePair {
  std::function<double(const Vec&)> f;
  std::function<double(const Vec&)> f_star;
};

// A maximal monotone operator exposed through its resolvent
// J_{lambda T} = (lambda T + I)^{-1}.
struct MonotoneOracle {
  std::function<Vec(double lambda, const Vec& u)> resolvent;
  OracleKind kind = OracleKind::Custom;
  std::optional<ConjugatePair> conjugate;
};

Vec resolve(const MonotoneOracle& op, double lambda, const Vec& u);

// True iff f(x) + f*(u) <= <x,u> + eps + 1e-10, i.e. u lies in the
// eps-subdifferential of f at x (which is contained in the eps-enlargement).
bool eps_subdiff_check(const ConjugatePair& pair, const Vec& x, const Vec& u,
                       double eps);
// Throws UnsupportedCheckError when the oracle carries no conjugate pair.
bool eps_subdiff_check(const MonotoneOracle& op, const Vec& x, const Vec& u,
                       double eps);
// The raw gap f(x) + f*(u) - <x,u>, clamped at zero.
double fenchel_young_gap(const ConjugatePair& pair, const Vec& x,
                         const Vec& u);

// Nonempty closed convex set exposed through its projection.
struct ProjectableSet {
  std::function<Vec(const Vec&)> project;
  double tol = 1e-9;
};

ProjectableSet whole_space();
ProjectableSet box_set(Vec lo, Vec hi);  // entries may be +-infinity

enum class Regularity { Cocoercive, Lipschitz };

// Single-valued continuous monotone map with declared modulus:
// 1/L-cocoercive or L-Lipschitz on its domain.
struct ForwardOracle {
  std::function<Vec(const Vec&)> eval;
  double modulus = 1.0;
  Regularity regularity = Regularity::Cocoercive;
  ProjectableSet domain = whole_space();
};

struct SplitOperator {
  ForwardOracle F;
  MonotoneOracle B;
  ProjectableSet C;
};

// One term of the inclusion: a plain resolvent oracle, an F + B split, or
// both when the structure admits closed forms either way. Block i is paired
// with map i of the LinearOpFamily (last block = identity map).
struct OperatorBlock {
  std::optional<MonotoneOracle> T;
  std::optional<SplitOperator> split;
};

// ---- catalog -------------------------------------------------------------

Vec soft_threshold(const Vec& u, double t);

MonotoneOracle zero_operator();
MonotoneOracle l1_subdifferential(double mu);
MonotoneOracle box_normal_cone(Vec lo, Vec hi);
// T z = M z + q with M + M^T positive semidefinite; resolvent by dense solve
// of (lambda M + I) x = u - lambda q.
MonotoneOracle affine_operator(Mat m, Vec q);
// Gradient of 0.5 ||A z - b||^2, as a plain oracle (affine resolvent).
MonotoneOracle quadratic_gradient_oracle(const Mat& a, const Vec& b);
// Same map as a forward oracle, cocoercive with L = ||A||^2.
ForwardOracle quadratic_gradient_forward(const Mat& a, const Vec& b);
// F z = M z declared L-Lipschitz (used with skew-symmetric M).
ForwardOracle linear_forward(Mat m, double lipschitz);
ForwardOracle zero_forward(double nominal_modulus = 1.0);

// Randomized audits; they can flag a declared modulus but not certify it.
struct ModulusAudit {
  int pairs = 0;
  int violations = 0;
  double worst_violation = 0.0;  // most negative defect observed
  bool passed() const { return violations == 0; }
};

ModulusAudit audit_cocoercivity(const ForwardOracle& f, Index dim, int pairs,
                                std::uint64_t seed);
ModulusAudit audit_lipschitz(const ForwardOracle& f, Index dim, int pairs,
                             std::uint64_t seed);

}  // namespace psplit
