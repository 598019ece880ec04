#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "psplit/types.hpp"

namespace psplit {

// Weight of the z-block in the product-space inner product
// <p,q> = gamma*<z_p,z_q> + sum_i <w_i_p, w_i_q>.
struct GammaMetric {
  double gamma = 1.0;

  GammaMetric() = default;
  explicit GammaMetric(double g) : gamma(g) {
    if (!(g > 0.0)) throw DimensionError("GammaMetric: gamma must be > 0");
  }
};

// Linear map H0 -> Hi with adjoint access. Operator norms are only needed by
// diagnostics; when not supplied they are estimated by power iteration.
class LinearOp {
 public:
  virtual ~LinearOp() = default;

  virtual Index rows() const = 0;  // dim of the codomain Hi
  virtual Index cols() const = 0;  // dim of H0
  virtual Vec apply(const Vec& x) const = 0;
  virtual Vec apply_adjoint(const Vec& u) const = 0;

  // Estimate of ||G|| (largest singular value).
  double norm_estimate() const;

 protected:
  // Supplied exact norm, if any.
  std::optional<double> supplied_norm_;
};

class DenseLinearOp final : public LinearOp {
 public:
  explicit DenseLinearOp(Mat a, std::optional<double> op_norm = std::nullopt)
      : a_(std::move(a)) {
    supplied_norm_ = op_norm;
  }

  Index rows() const override { return a_.rows(); }
  Index cols() const override { return a_.cols(); }
  Vec apply(const Vec& x) const override { return a_ * x; }
  Vec apply_adjoint(const Vec& u) const override {
    return a_.transpose() * u;
  }
  const Mat& matrix() const { return a_; }

 private:
  Mat a_;
};

// The maps G_1,...,G_{n-1}; G_n is the identity on H0 by convention and is
// never materialized. Blocks are indexed 0..n-1 with the last block mapped by
// the identity.
class LinearOpFamily {
 public:
  LinearOpFamily(std::vector<std::shared_ptr<const LinearOp>> ops,
                 Index domain_dim);

  int n() const { return static_cast<int>(ops_.size()) + 1; }
  Index domain_dim() const { return domain_dim_; }
  Index block_dim(int i) const;

  Vec apply(int i, const Vec& x) const;
  Vec apply_adjoint(int i, const Vec& u) const;
  double op_norm(int i) const;
  double max_op_norm_sq() const;

 private:
  void check_index(int i) const;

  std::vector<std::shared_ptr<const LinearOp>> ops_;
  Index domain_dim_;
};

// p = (z, w_1, ..., w_{n-1}). The implicit dual block w_n = -sum G_i^* w_i is
// never stored; it is recomputed on demand (implied_dual_block).
struct ProductPoint {
  Vec z;
  std::vector<Vec> w;

  static ProductPoint zero(const LinearOpFamily& f);
  bool compatible_with(const ProductPoint& other) const;
};

ProductPoint operator+(const ProductPoint& p, const ProductPoint& q);
ProductPoint operator-(const ProductPoint& p, const ProductPoint& q);
ProductPoint operator*(double t, const ProductPoint& p);

double gamma_inner(const ProductPoint& p, const ProductPoint& q,
                   const GammaMetric& m);
double gamma_norm_sq(const ProductPoint& p, const GammaMetric& m);
double gamma_norm(const ProductPoint& p, const GammaMetric& m);

// -sum_i G_i^* w_i.
Vec implied_dual_block(const ProductPoint& p, const LinearOpFamily& f);

}  // namespace psplit
