#pragma once

#include <vector>

#include "psplit/product_space.hpp"

namespace psplit {

// Output of one block subproblem: y in T^[eps](x) with the step size used.
struct BlockTriple {
  Vec x;
  Vec y;
  double eps = 0.0;
  double lambda = 1.0;
};

// The affine separator phi_k built from n block triples,
//   phi(p) = sum_i (<G_i z - x_i, y_i - w_i> - eps_i),
// stored in collected form: evaluation is one inner product plus a constant,
// and the gamma-metric gradient is cached.
class Separator {
 public:
  Separator(const std::vector<BlockTriple>& blocks, const LinearOpFamily& f,
            const GammaMetric& m);

  double eval(const ProductPoint& p) const;
  // Direct block-by-block evaluation (with implied w_n); for cross-checks.
  double eval_block_form(const ProductPoint& p, const LinearOpFamily& f,
                         const std::vector<BlockTriple>& blocks) const;

  const ProductPoint& gradient() const { return gradient_; }
  double grad_norm_sq() const { return grad_norm_sq_; }
  double constant() const { return constant_; }

  // sum_i G_i^* y_i + y_n (the z-coefficient before the 1/gamma scaling).
  const Vec& dual_coefficient() const { return dual_coeff_; }
  // x_i - G_i x_n for i < n (the w-block gradient entries).
  const std::vector<Vec>& primal_coefficients() const {
    return primal_coeffs_;
  }
  double gamma() const { return gamma_; }

 private:
  Vec dual_coeff_;
  std::vector<Vec> primal_coeffs_;
  double constant_ = 0.0;
  double gamma_ = 1.0;
  ProductPoint gradient_;
  double grad_norm_sq_ = 0.0;
};

Separator build_separator(const std::vector<BlockTriple>& blocks,
                          const LinearOpFamily& f, const GammaMetric& m);

}  // namespace psplit
