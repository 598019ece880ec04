#include "psplit/separator.hpp"

namespace psplit {

Separator::Separator(const std::vector<BlockTriple>& blocks,
                     const LinearOpFamily& f, const GammaMetric& m)
    : gamma_(m.gamma) {
  const int n = f.n();
  if (static_cast<int>(blocks.size()) != n)
    throw DimensionError("Separator: expected one triple per block");
  for (int i = 0; i < n; ++i) {
    const auto& t = blocks[static_cast<size_t>(i)];
    if (t.x.size() != f.block_dim(i) || t.y.size() != f.block_dim(i))
      throw DimensionError("Separator: triple dimension mismatch");
    if (t.eps < 0.0) throw DimensionError("Separator: eps must be >= 0");
    if (!(t.lambda > 0.0)) throw DimensionError("Separator: lambda must be > 0");
  }

  const auto& last = blocks[static_cast<size_t>(n - 1)];
  dual_coeff_ = last.y;
  constant_ = 0.0;
  primal_coeffs_.reserve(static_cast<size_t>(n - 1));
  for (int i = 0; i < n - 1; ++i) {
    const auto& t = blocks[static_cast<size_t>(i)];
    dual_coeff_ += f.apply_adjoint(i, t.y);
    primal_coeffs_.push_back(t.x - f.apply(i, last.x));
  }
  for (const auto& t : blocks) constant_ -= t.x.dot(t.y) + t.eps;

  gradient_.z = dual_coeff_ / gamma_;
  gradient_.w = primal_coeffs_;
  grad_norm_sq_ = dual_coeff_.squaredNorm() / gamma_;
  for (const auto& c : primal_coeffs_) grad_norm_sq_ += c.squaredNorm();
}

double Separator::eval(const ProductPoint& p) const {
  if (p.z.size() != dual_coeff_.size() ||
      p.w.size() != primal_coeffs_.size())
    throw DimensionError("Separator::eval: dimension mismatch");
  double v = dual_coeff_.dot(p.z) + constant_;
  for (size_t i = 0; i < primal_coeffs_.size(); ++i)
    v += primal_coeffs_[i].dot(p.w[i]);
  return v;
}

double Separator::eval_block_form(const ProductPoint& p,
                                  const LinearOpFamily& f,
                                  const std::vector<BlockTriple>& blocks) const {
  const int n = f.n();
  Vec wn = implied_dual_block(p, f);
  double v = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto& t = blocks[static_cast<size_t>(i)];
    const Vec gi_z = f.apply(i, p.z);
    const Vec& wi = i == n - 1 ? wn : p.w[static_cast<size_t>(i)];
    v += (gi_z - t.x).dot(t.y - wi) - t.eps;
  }
  return v;
}

Separator build_separator(const std::vector<BlockTriple>& blocks,
                          const LinearOpFamily& f, const GammaMetric& m) {
  return Separator(blocks, f, m);
}

}  // namespace psplit
