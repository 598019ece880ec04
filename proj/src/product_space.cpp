#include "psplit/product_space.hpp"

#include <cmath>

#include "psplit/rng.hpp"

namespace psplit {

double LinearOp::norm_estimate() const {
  if (supplied_norm_) return *supplied_norm_;
  // Power iteration on G^* G, 100 steps with relative stagnation stop.
  SplitMix64 rng(0x9d2c5680u);
  Vec v = rng.next_gaussian_vec(cols());
  double nv = v.norm();
  if (nv == 0.0) return 0.0;
  v /= nv;
  double rayleigh = 0.0;
  for (int it = 0; it < 100; ++it) {
    Vec u = apply_adjoint(apply(v));
    double nu = u.norm();
    if (nu == 0.0) return 0.0;  // zero map
    double next = v.dot(u);
    u /= nu;
    if (it > 0 && std::abs(next - rayleigh) <= 1e-10 * std::abs(next)) {
      rayleigh = next;
      break;
    }
    rayleigh = next;
    v = u;
  }
  return std::sqrt(std::max(rayleigh, 0.0));
}

LinearOpFamily::LinearOpFamily(
    std::vector<std::shared_ptr<const LinearOp>> ops, Index domain_dim)
    : ops_(std::move(ops)), domain_dim_(domain_dim) {
  if (domain_dim_ <= 0)
    throw DimensionError("LinearOpFamily: domain dimension must be positive");
  for (const auto& op : ops_) {
    if (!op) throw DimensionError("LinearOpFamily: null operator");
    if (op->cols() != domain_dim_)
      throw DimensionError("LinearOpFamily: operator domain mismatch");
  }
}

void LinearOpFamily::check_index(int i) const {
  if (i < 0 || i >= n())
    throw DimensionError("LinearOpFamily: block index out of range");
}

Index LinearOpFamily::block_dim(int i) const {
  check_index(i);
  return i == n() - 1 ? domain_dim_ : ops_[static_cast<size_t>(i)]->rows();
}

Vec LinearOpFamily::apply(int i, const Vec& x) const {
  check_index(i);
  if (x.size() != domain_dim_)
    throw DimensionError("LinearOpFamily::apply: vector not in H0");
  if (i == n() - 1) return x;
  return ops_[static_cast<size_t>(i)]->apply(x);
}

Vec LinearOpFamily::apply_adjoint(int i, const Vec& u) const {
  check_index(i);
  if (u.size() != block_dim(i))
    throw DimensionError("LinearOpFamily::apply_adjoint: vector not in Hi");
  if (i == n() - 1) return u;
  return ops_[static_cast<size_t>(i)]->apply_adjoint(u);
}

double LinearOpFamily::op_norm(int i) const {
  check_index(i);
  if (i == n() - 1) return 1.0;
  return ops_[static_cast<size_t>(i)]->norm_estimate();
}

double LinearOpFamily::max_op_norm_sq() const {
  double m = 1.0;  // identity block
  for (int i = 0; i + 1 < n(); ++i) {
    double nm = op_norm(i);
    m = std::max(m, nm * nm);
  }
  return m;
}

ProductPoint ProductPoint::zero(const LinearOpFamily& f) {
  ProductPoint p;
  p.z = Vec::Zero(f.domain_dim());
  p.w.reserve(static_cast<size_t>(f.n() - 1));
  for (int i = 0; i + 1 < f.n(); ++i)
    p.w.push_back(Vec::Zero(f.block_dim(i)));
  return p;
}

bool ProductPoint::compatible_with(const ProductPoint& other) const {
  if (z.size() != other.z.size() || w.size() != other.w.size()) return false;
  for (size_t i = 0; i < w.size(); ++i)
    if (w[i].size() != other.w[i].size()) return false;
  return true;
}

ProductPoint operator+(const ProductPoint& p, const ProductPoint& q) {
  if (!p.compatible_with(q)) throw DimensionError("ProductPoint: p + q");
  ProductPoint r;
  r.z = p.z + q.z;
  r.w.reserve(p.w.size());
  for (size_t i = 0; i < p.w.size(); ++i) r.w.push_back(p.w[i] + q.w[i]);
  return r;
}

ProductPoint operator-(const ProductPoint& p, const ProductPoint& q) {
  if (!p.compatible_with(q)) throw DimensionError("ProductPoint: p - q");
  ProductPoint r;
  r.z = p.z - q.z;
  r.w.reserve(p.w.size());
  for (size_t i = 0; i < p.w.size(); ++i) r.w.push_back(p.w[i] - q.w[i]);
  return r;
}

ProductPoint operator*(double t, const ProductPoint& p) {
  ProductPoint r;
  r.z = t * p.z;
  r.w.reserve(p.w.size());
  for (const auto& wi : p.w) r.w.push_back(t * wi);
  return r;
}

double gamma_inner(const ProductPoint& p, const ProductPoint& q,
                   const GammaMetric& m) {
  if (!p.compatible_with(q)) throw DimensionError("gamma_inner: p, q");
  double s = m.gamma * p.z.dot(q.z);
  for (size_t i = 0; i < p.w.size(); ++i) s += p.w[i].dot(q.w[i]);
  return s;
}

double gamma_norm_sq(const ProductPoint& p, const GammaMetric& m) {
  return gamma_inner(p, p, m);
}

double gamma_norm(const ProductPoint& p, const GammaMetric& m) {
  return std::sqrt(std::max(gamma_norm_sq(p, m), 0.0));
}

Vec implied_dual_block(const ProductPoint& p, const LinearOpFamily& f) {
  if (static_cast<int>(p.w.size()) != f.n() - 1)
    throw DimensionError("implied_dual_block: block count mismatch");
  Vec wn = Vec::Zero(f.domain_dim());
  for (int i = 0; i + 1 < f.n(); ++i)
    wn -= f.apply_adjoint(i, p.w[static_cast<size_t>(i)]);
  return wn;
}

}  // namespace psplit
