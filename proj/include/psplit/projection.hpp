#pragma once

#include "psplit/product_space.hpp"
#include "psplit/separator.hpp"

namespace psplit {

// Half-space {p : <normal, p>_gamma + offset <= 0}. A zero normal denotes the
// whole space when offset <= 0 and the empty set otherwise.
struct HalfSpace {
  ProductPoint normal;
  double offset = 0.0;
};

double halfspace_value(const HalfSpace& h, const ProductPoint& p,
                       const GammaMetric& m);

// Gamma-metric projection: p - max{0, value} / ||normal||^2_gamma * normal.
ProductPoint project_halfspace(const ProductPoint& p, const HalfSpace& h,
                               const GammaMetric& m);

// Projection of p0 onto the intersection of two half-spaces by enumeration of
// the KKT active sets; the two-constraint case solves a 2x2 Gram system with
// a relative singularity guard. Throws InfeasibleProjectionError when no
// candidate is feasible within tolerance.
ProductPoint project_onto_two_halfspaces(const ProductPoint& p0,
                                         const HalfSpace& a,
                                         const HalfSpace& b,
                                         const GammaMetric& m);

// The solver update P_{H_k n W_k}(p0), with H_k the separator half-space and
// W_k the half-space through pk with normal p0 - pk. W_k degenerates to the
// whole space when p0 = pk (k = 0 or stagnation).
ProductPoint project_p0_onto_intersection(const ProductPoint& p0,
                                          const ProductPoint& pk,
                                          const Separator& s,
                                          const GammaMetric& m);

}  // namespace psplit
