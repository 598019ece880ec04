#include "psplit/variants.hpp"

#include <algorithm>
#include <cmath>

namespace psplit {

double variant_stepsize(VariantKind kind, double sigma, double L) {
  if (!(sigma > 0.0 && sigma < 1.0))
    throw DimensionError("variant_stepsize: need 0 < sigma < 1");
  if (!(L > 0.0)) throw DimensionError("variant_stepsize: need L > 0");
  return kind == VariantKind::ForwardBackward ? 2.0 * sigma * sigma / L
                                              : sigma / L;
}

BlockTriple fb_block_step(const ForwardOracle& F, const MonotoneOracle& B,
                          const ProjectableSet& C, double lambda,
                          const Vec& target_z, const Vec& target_w) {
  if (!(lambda > 0.0)) throw DimensionError("fb_block_step: lambda must be > 0");
  Vec z_bar = C.project(target_z);
  Vec u = target_z + lambda * target_w - lambda * F.eval(z_bar);
  BlockTriple t;
  t.x = resolve(B, lambda, u);
  t.y = (target_z + lambda * target_w - t.x) / lambda;
  t.eps = F.modulus * (t.x - z_bar).squaredNorm() / 4.0;
  t.lambda = lambda;
  return t;
}

BlockTriple tseng_block_step(const ForwardOracle& F, const MonotoneOracle& B,
                             const ProjectableSet& C, double lambda,
                             const Vec& target_z, const Vec& target_w) {
  if (!(lambda > 0.0))
    throw DimensionError("tseng_block_step: lambda must be > 0");
  Vec z_bar = C.project(target_z);
  Vec f_bar = F.eval(z_bar);
  Vec u = target_z + lambda * target_w - lambda * f_bar;
  BlockTriple t;
  t.x = resolve(B, lambda, u);
  t.y = (target_z + lambda * target_w - t.x) / lambda + F.eval(t.x) - f_bar;
  t.eps = 0.0;
  t.lambda = lambda;
  return t;
}

VariantSetup make_variant_setup(const std::vector<OperatorBlock>& blocks,
                                VariantKind kind, double sigma) {
  if (!(sigma > 0.0 && sigma < 1.0))
    throw DimensionError("make_variant_setup: variants need 0 < sigma < 1");

  const int n = static_cast<int>(blocks.size());
  std::vector<double> lambdas(static_cast<size_t>(n), 1.0);
  bool any_split = false;
  for (int i = 0; i < n; ++i) {
    const auto& b = blocks[static_cast<size_t>(i)];
    if (b.split) {
      any_split = true;
      if (kind == VariantKind::ForwardBackward &&
          b.split->F.regularity != Regularity::Cocoercive)
        throw DimensionError(
            "make_variant_setup: forward-backward steps need cocoercive "
            "forward oracles (block " +
            std::to_string(i) + ")");
      lambdas[static_cast<size_t>(i)] =
          variant_stepsize(kind, sigma, b.split->F.modulus);
    } else if (!b.T) {
      throw DimensionError("make_variant_setup: block " + std::to_string(i) +
                           " has neither split nor resolvent");
    }
  }
  if (!any_split)
    throw DimensionError(
        "make_variant_setup: no split blocks; use the generic solver");

  VariantSetup s;
  s.lambda_lo = *std::min_element(lambdas.begin(), lambdas.end());
  s.lambda_hi = *std::max_element(lambdas.begin(), lambdas.end());
  s.lambda_rule = [lambdas](int, int i) {
    return lambdas[static_cast<size_t>(i)];
  };
  s.inner = [kind](const OperatorBlock& block, const BlockWork& w) {
    if (block.split) {
      const auto& sp = *block.split;
      return kind == VariantKind::ForwardBackward
                 ? fb_block_step(sp.F, sp.B, sp.C, w.lambda, w.target_z,
                                 w.target_w)
                 : tseng_block_step(sp.F, sp.B, sp.C, w.lambda, w.target_z,
                                    w.target_w);
    }
    return exact_prox_inner(block, w.lambda, w.target_z, w.target_w);
  };
  return s;
}

void apply_variant(SolverConfig& cfg, const VariantSetup& setup) {
  cfg.lambda_lo = setup.lambda_lo;
  cfg.lambda_hi = setup.lambda_hi;
  cfg.lambda_rule = setup.lambda_rule;
}

}  // namespace psplit
