#include "psplit/projection.hpp"

#include <cmath>
#include <limits>

namespace psplit {

namespace {

constexpr double kFeasTol = 1e-9;
constexpr double kGramGuard = 1e-14;
constexpr double kDegenerateNormal = 1e-28;

double feas_tol(const HalfSpace& h, const ProductPoint& p0,
                const GammaMetric& m) {
  return kFeasTol * (1.0 + gamma_norm(h.normal, m)) *
         (1.0 + gamma_norm(p0, m));
}

}  // namespace

double halfspace_value(const HalfSpace& h, const ProductPoint& p,
                       const GammaMetric& m) {
  return gamma_inner(h.normal, p, m) + h.offset;
}

ProductPoint project_halfspace(const ProductPoint& p, const HalfSpace& h,
                               const GammaMetric& m) {
  double v = halfspace_value(h, p, m);
  if (v <= 0.0) return p;
  double nsq = gamma_norm_sq(h.normal, m);
  double scale = 1.0 + gamma_norm_sq(p, m);
  if (nsq <= kDegenerateNormal * scale) {
    // Degenerate normal: whole space iff offset <= 0, and v > 0 rules that out.
    throw InfeasibleProjectionError(
        "project_halfspace: empty degenerate half-space");
  }
  return p - (v / nsq) * h.normal;
}

ProductPoint project_onto_two_halfspaces(const ProductPoint& p0,
                                         const HalfSpace& a,
                                         const HalfSpace& b,
                                         const GammaMetric& m) {
  const double va = halfspace_value(a, p0, m);
  const double vb = halfspace_value(b, p0, m);
  const double tol_a = feas_tol(a, p0, m);
  const double tol_b = feas_tol(b, p0, m);

  // Case 0: p0 already feasible for both.
  if (va <= 0.0 && vb <= 0.0) return p0;

  const double asq = gamma_norm_sq(a.normal, m);
  const double bsq = gamma_norm_sq(b.normal, m);

  // Candidates are ranked by measured infeasibility first and distance
  // second. Plain min-distance would let a stationary candidate that is
  // merely tolerance-feasible (the pk of the solver update) beat the exact
  // two-constraint solution and park the iteration at a sqrt(tol) residual
  // floor. A genuinely valid single-constraint case still wins: its
  // violation is zero and the Gram candidate is rejected by its multiplier
  // sign there.
  bool have_best = false;
  double best_viol = std::numeric_limits<double>::infinity();
  double best_dist = std::numeric_limits<double>::infinity();
  ProductPoint best;

  auto consider = [&](const ProductPoint& q) {
    double qa = halfspace_value(a, q, m);
    double qb = halfspace_value(b, q, m);
    if (qa > tol_a || qb > tol_b) return;
    double viol = std::max(qa, 0.0) + std::max(qb, 0.0);
    double d = gamma_norm_sq(q - p0, m);
    if (!have_best || viol < best_viol ||
        (viol == best_viol && d < best_dist)) {
      have_best = true;
      best_viol = viol;
      best_dist = d;
      best = q;
    }
  };

  // Single-constraint cases (the point itself when its constraint is slack).
  if (asq > 0.0) consider(p0 - (std::max(va, 0.0) / asq) * a.normal);
  if (bsq > 0.0) consider(p0 - (std::max(vb, 0.0) / bsq) * b.normal);

  // Both constraints active: solve the 2x2 Gram system in the multipliers.
  const double ab = gamma_inner(a.normal, b.normal, m);
  const double det = asq * bsq - ab * ab;
  if (det > kGramGuard * asq * bsq) {
    double mu = (bsq * va - ab * vb) / det;
    double nu = (asq * vb - ab * va) / det;
    double mult_tol = 1e-9 * (1.0 + std::abs(mu) + std::abs(nu));
    if (mu >= -mult_tol && nu >= -mult_tol)
      consider(p0 - mu * a.normal - nu * b.normal);
  }

  if (!have_best)
    throw InfeasibleProjectionError(
        "project_onto_two_halfspaces: no feasible candidate (values " +
        std::to_string(va) + ", " + std::to_string(vb) + ")");
  return best;
}

ProductPoint project_p0_onto_intersection(const ProductPoint& p0,
                                          const ProductPoint& pk,
                                          const Separator& s,
                                          const GammaMetric& m) {
  HalfSpace h{s.gradient(), s.constant()};

  ProductPoint wn = p0 - pk;
  double wnsq = gamma_norm_sq(wn, m);
  double scale = 1.0 + gamma_norm_sq(p0, m);
  if (wnsq <= kDegenerateNormal * scale) {
    // W_k is the whole space; its defining inequality is vacuous.
    return project_halfspace(p0, h, m);
  }
  HalfSpace w{wn, -gamma_inner(wn, pk, m)};
  return project_onto_two_halfspaces(p0, h, w, m);
}

}  // namespace psplit
