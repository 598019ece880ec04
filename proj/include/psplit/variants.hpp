#pragma once

#include "psplit/core.hpp"

namespace psplit {

enum class VariantKind { ForwardBackward, Tseng };

// Fixed per-block step size: 2 sigma^2 / L for forward-backward steps,
// sigma / L for Tseng steps. Requires 0 < sigma < 1.
double variant_stepsize(VariantKind kind, double sigma, double L);

// One forward-backward block step:
//   z_bar = P_C(target_z),
//   x = (lambda B + I)^{-1}(target_z + lambda target_w - lambda F(z_bar)),
//   y = (target_z + lambda target_w - x) / lambda,
//   eps = L ||x - z_bar||^2 / 4.
// The prox-equation error vanishes exactly and 2 lambda eps <=
// sigma^2 ||target_z - x||^2 under lambda = 2 sigma^2 / L.
BlockTriple fb_block_step(const ForwardOracle& F, const MonotoneOracle& B,
                          const ProjectableSet& C, double lambda,
                          const Vec& target_z, const Vec& target_w);

// One forward-backward-forward (Tseng) block step: same x as above,
//   y = (target_z + lambda target_w - x) / lambda + F(x) - F(z_bar),
//   eps = 0,
// with ||lambda y + x - (target_z + lambda target_w)|| <=
// sigma ||target_z - x|| under lambda = sigma / L.
BlockTriple tseng_block_step(const ForwardOracle& F, const MonotoneOracle& B,
                             const ProjectableSet& C, double lambda,
                             const Vec& target_z, const Vec& target_w);

// Inner solver plus the step-size rule packaging a variant for the generic
// loop: split blocks take the closed-form step at their fixed lambda, plain
// blocks fall back to the exact resolvent step at lambda = 1.
struct VariantSetup {
  InnerSolver inner;
  std::function<double(int, int)> lambda_rule;
  double lambda_lo = 1.0;
  double lambda_hi = 1.0;
};

VariantSetup make_variant_setup(const std::vector<OperatorBlock>& blocks,
                                VariantKind kind, double sigma);

// Installs the variant's lambda rule and bounds into the config.
void apply_variant(SolverConfig& cfg, const VariantSetup& setup);

}  // namespace psplit
