#include "psplit/problems.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>
#include <cmath>
#include <limits>

#include "psplit/rng.hpp"

namespace psplit {

namespace {

double op_norm_2(const Mat& a) {
  if (a.rows() == 0 || a.cols() == 0) return 0.0;
  return a.jacobiSvd().singularValues()(0);
}

// Orthonormal basis of the null space of a.
Mat null_space_basis(const Mat& a) {
  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  double tol = 1e-12 * (sv.size() > 0 ? sv(0) : 0.0) *
               std::max(a.rows(), a.cols());
  Index rank = 0;
  for (Index j = 0; j < sv.size(); ++j)
    if (sv(j) > std::max(tol, 1e-300)) ++rank;
  return svd.matrixV().rightCols(a.cols() - rank);
}

// Orthogonal projector onto the span of the columns of basis, which may be
// rank deficient.
Mat span_projector(const Mat& basis) {
  if (basis.cols() == 0) return Mat::Zero(basis.rows(), basis.rows());
  Eigen::ColPivHouseholderQR<Mat> cqr(basis);
  Index rank = cqr.rank();
  Mat q = cqr.householderQ() * Mat::Identity(basis.rows(), rank);
  return q * q.transpose();
}

// Resolvent of the normal cone of {x : a x = b}: projection onto the set.
MonotoneOracle affine_subspace_normal_cone(const Mat& a, const Vec& b) {
  auto gram_llt = std::make_shared<Eigen::LLT<Mat>>(
      Mat(a * a.transpose()));
  MonotoneOracle op;
  op.kind = OracleKind::NormalCone;
  op.resolvent = [a, b, gram_llt](double, const Vec& u) {
    Vec s = gram_llt->solve(a * u - b);
    return (u - a.transpose() * s).eval();
  };
  return op;
}

std::shared_ptr<const LinearOp> identity_op(Index dim) {
  return std::make_shared<DenseLinearOp>(Mat::Identity(dim, dim), 1.0);
}

}  // namespace

ProblemInstance make_affine_feasibility(int dim, std::uint64_t seed) {
  if (dim < 1) throw DimensionError("make_affine_feasibility: dim >= 1");
  SplitMix64 rng(SplitMix64::mix(seed, 0xaff1));
  const int m1 = dim / 2 + 1;
  const int m2 = dim / 2 + 1;
  Mat a1 = rng.next_gaussian_mat(m1, dim);
  Mat a2 = rng.next_gaussian_mat(m2, dim);
  Vec z_meet = rng.next_gaussian_vec(dim);
  Vec b1 = a1 * z_meet;
  Vec b2 = a2 * z_meet;

  ProblemInstance prob{
      {"affine", dim, 0, 0, 0.0, seed},
      LinearOpFamily({identity_op(dim)}, dim),
      {},
      {},
      {}};
  prob.blocks.push_back({affine_subspace_normal_cone(a1, b1), std::nullopt});
  prob.blocks.push_back({affine_subspace_normal_cone(a2, b2), std::nullopt});

  // m1 + m2 > dim, so V1 n V2 = {z_meet} generically; the dual part of S_e is
  // range(A1^T) n range(A2^T) = (ker A1 + ker A2)^perp.
  Mat k1 = null_space_basis(a1);
  Mat k2 = null_space_basis(a2);
  Mat stacked(dim, k1.cols() + k2.cols());
  stacked << k1, k2;
  Mat p_span = span_projector(stacked);
  Mat p_dual = Mat::Identity(dim, dim) - p_span;

  prob.oracle.z_star = z_meet;
  prob.oracle.w_star = std::vector<Vec>{Vec::Zero(dim)};
  prob.oracle.project_se = [z_meet, p_dual](const ProductPoint& p) {
    ProductPoint q;
    q.z = z_meet;
    q.w = {p_dual * p.w[0]};
    return q;
  };

  prob.data = {{"A1", a1}, {"b1", b1}, {"A2", a2}, {"b2", b2}};
  prob.block_tags = {"affine-subspace-normal-cone", "affine-subspace-normal-cone"};
  return prob;
}

Vec lasso_reference(const Mat& a, const Vec& b, double mu, double tol,
                    int max_iter) {
  const double L = std::max(op_norm_2(a), 1e-12);
  const double t = 1.0 / (L * L);
  Vec z = Vec::Zero(a.cols());
  for (int it = 0; it < max_iter; ++it) {
    Vec g = a.transpose() * (a * z - b);
    Vec z_next = soft_threshold(z - t * g, t * mu);
    double r = (z - z_next).lpNorm<Eigen::Infinity>() / t;
    z = z_next;
    if (r <= tol) break;
  }
  return z;
}

ProblemInstance make_lasso(int rows, int cols, double mu, std::uint64_t seed) {
  if (rows < 1 || cols < 1 || !(mu > 0.0))
    throw DimensionError("make_lasso: invalid parameters");
  SplitMix64 rng(SplitMix64::mix(seed, 0x1a50));
  Mat a = rng.next_gaussian_mat(rows, cols) / std::sqrt(double(rows));
  Vec z_true = Vec::Zero(cols);
  for (Index j = 0; j < cols; j += 2) z_true[j] = rng.next_gaussian();
  Vec b = a * z_true + 0.1 * rng.next_gaussian_vec(rows);

  ProblemInstance prob{
      {"lasso", 0, rows, cols, mu, seed},
      LinearOpFamily({identity_op(cols)}, cols),
      {},
      {},
      {}};
  prob.blocks.push_back({l1_subdifferential(mu), std::nullopt});
  OperatorBlock quad;
  quad.T = quadratic_gradient_oracle(a, b);
  quad.split = SplitOperator{quadratic_gradient_forward(a, b), zero_operator(),
                             whole_space()};
  prob.blocks.push_back(std::move(quad));

  Vec z_star = lasso_reference(a, b, mu);
  Vec w_star = -(a.transpose() * (a * z_star - b)).eval();
  prob.oracle.z_star = z_star;
  prob.oracle.w_star = std::vector<Vec>{w_star};
  if (rows >= cols) {
    // Full column rank makes S_e the singleton {(z*, w*)}.
    ProductPoint p_star;
    p_star.z = z_star;
    p_star.w = {w_star};
    prob.oracle.project_se = [p_star](const ProductPoint&) { return p_star; };
  }

  prob.data = {{"A", a}, {"b", b}};
  prob.block_tags = {"l1-subdifferential", "quadratic-gradient"};
  return prob;
}

std::pair<Vec, Vec> fused_reference(const Mat& a, const Vec& b, const Mat& d,
                                    double mu, double tol, int max_iter) {
  Eigen::LLT<Mat> gram(Mat(a.transpose() * a));
  if (gram.info() != Eigen::Success)
    throw DimensionError("fused_reference: A^T A not positive definite");
  Vec atb = a.transpose() * b;
  auto primal = [&](const Vec& u) {
    return gram.solve(atb - d.transpose() * u).eval();
  };
  Mat q = d * gram.solve(Mat(d.transpose()));
  const double step = 1.0 / std::max(op_norm_2(q), 1e-12);
  Vec u = Vec::Zero(d.rows());
  for (int it = 0; it < max_iter; ++it) {
    Vec grad = d * primal(u);
    Vec u_next = (u + step * grad).cwiseMax(-mu).cwiseMin(mu);
    double r = (u - u_next).lpNorm<Eigen::Infinity>();
    u = u_next;
    if (r <= tol * std::max(1.0, mu)) break;
  }
  return {primal(u), u};
}

ProblemInstance make_fused(int rows, int cols, double mu, std::uint64_t seed) {
  if (cols < 2 || rows < 1 || !(mu > 0.0))
    throw DimensionError("make_fused: invalid parameters");
  SplitMix64 rng(SplitMix64::mix(seed, 0xf05e));
  Mat a = rng.next_gaussian_mat(rows, cols) / std::sqrt(double(rows));
  // Piecewise-constant ground signal.
  Vec z_true(cols);
  double level = rng.next_gaussian();
  for (Index j = 0; j < cols; ++j) {
    if (j > 0 && rng.next_uniform() < 0.4) level = rng.next_gaussian();
    z_true[j] = level;
  }
  Vec b = a * z_true + 0.1 * rng.next_gaussian_vec(rows);

  Mat d = Mat::Zero(cols - 1, cols);
  for (Index j = 0; j + 1 < cols; ++j) {
    d(j, j) = -1.0;
    d(j, j + 1) = 1.0;
  }

  ProblemInstance prob{
      {"fused", 0, rows, cols, mu, seed},
      LinearOpFamily({std::make_shared<DenseLinearOp>(d, op_norm_2(d))}, cols),
      {},
      {},
      {}};
  prob.blocks.push_back({l1_subdifferential(mu), std::nullopt});
  prob.blocks.push_back({quadratic_gradient_oracle(a, b), std::nullopt});

  if (rows >= cols) {
    auto [z_star, u_star] = fused_reference(a, b, d, mu);
    ProductPoint p_star;
    p_star.z = z_star;
    p_star.w = {u_star};
    prob.oracle.z_star = z_star;
    prob.oracle.w_star = std::vector<Vec>{u_star};
    prob.oracle.project_se = [p_star](const ProductPoint&) { return p_star; };
  }

  prob.data = {{"A", a}, {"b", b}, {"D", d}};
  prob.block_tags = {"l1-subdifferential", "quadratic-gradient"};
  return prob;
}

BoxVIEnumeration box_vi_solutions(const Mat& m, const Vec& lo, const Vec& hi) {
  const Index dim = m.rows();
  if (dim > 8)
    throw DimensionError("box_vi_solutions: enumeration limited to dim <= 8");
  const double tol = 1e-10 * (1.0 + m.cwiseAbs().maxCoeff());
  BoxVIEnumeration out;

  // Pattern digit per coordinate: 0 = at lo, 1 = free, 2 = at hi.
  long total = 1;
  for (Index j = 0; j < dim; ++j) total *= 3;
  std::vector<int> pat(static_cast<size_t>(dim));
  for (long code = 0; code < total; ++code) {
    long c = code;
    std::vector<Index> free_idx;
    Vec z = Vec::Zero(dim);
    bool pinned_at_infinity = false;
    for (Index j = 0; j < dim; ++j, c /= 3) {
      pat[static_cast<size_t>(j)] = static_cast<int>(c % 3);
      if (pat[static_cast<size_t>(j)] == 0) {
        if (std::isinf(lo[j])) pinned_at_infinity = true;
        z[j] = lo[j];
      }
      if (pat[static_cast<size_t>(j)] == 2) {
        if (std::isinf(hi[j])) pinned_at_infinity = true;
        z[j] = hi[j];
      }
      if (pat[static_cast<size_t>(j)] == 1) free_idx.push_back(j);
    }
    if (pinned_at_infinity) continue;
    const Index nf = static_cast<Index>(free_idx.size());
    if (nf > 0) {
      Mat mff(nf, nf);
      Vec rhs = Vec::Zero(nf);
      for (Index r = 0; r < nf; ++r) {
        for (Index cidx = 0; cidx < nf; ++cidx)
          mff(r, cidx) = m(free_idx[static_cast<size_t>(r)],
                           free_idx[static_cast<size_t>(cidx)]);
        double acc = 0.0;
        for (Index j = 0; j < dim; ++j)
          if (pat[static_cast<size_t>(j)] != 1)
            acc += m(free_idx[static_cast<size_t>(r)], j) * z[j];
        rhs[r] = -acc;
      }
      Eigen::CompleteOrthogonalDecomposition<Mat> cod(mff);
      Vec zf = cod.solve(rhs);
      if ((mff * zf - rhs).lpNorm<Eigen::Infinity>() > tol) continue;
      const bool deficient = cod.rank() < nf;
      bool inside = true;
      for (Index r = 0; r < nf && inside; ++r) {
        Index j = free_idx[static_cast<size_t>(r)];
        if (zf[r] < lo[j] - tol || zf[r] > hi[j] + tol) inside = false;
        z[j] = std::min(std::max(zf[r], lo[j]), hi[j]);
      }
      if (!inside) continue;
      if (deficient) out.manifold = true;
    }
    Vec mz = m * z;
    bool ok = true;
    for (Index j = 0; j < dim && ok; ++j) {
      if (pat[static_cast<size_t>(j)] == 0 && mz[j] < -tol) ok = false;
      if (pat[static_cast<size_t>(j)] == 2 && mz[j] > tol) ok = false;
      if (pat[static_cast<size_t>(j)] == 1 && std::abs(mz[j]) > tol) ok = false;
    }
    if (!ok) continue;
    bool dup = false;
    for (const auto& s : out.solutions)
      if ((s - z).lpNorm<Eigen::Infinity>() <= 1e-8) dup = true;
    if (!dup) out.solutions.push_back(z);
  }
  return out;
}

ProblemInstance make_skew_saddle(int dim, std::uint64_t seed) {
  if (dim < 2 || dim % 2 != 0)
    throw DimensionError("make_skew_saddle: dim must be even and >= 2");

  for (int attempt = 0; attempt < 50; ++attempt) {
    SplitMix64 rng(SplitMix64::mix(seed + 1000003ull * attempt, 0x54e3));
    Mat r = rng.next_gaussian_mat(dim, dim);
    Mat m = 0.5 * (r - r.transpose());
    double nm = op_norm_2(m);
    if (nm < 1e-12) continue;
    m *= 1.5 / nm;
    const double lips = 1.5;
    Vec lo(dim), hi(dim);
    for (Index j = 0; j < dim; ++j) {
      lo[j] = rng.next_uniform(0.1, 0.6);
      hi[j] = lo[j] + rng.next_uniform(0.5, 1.5);
    }

    BoxVIEnumeration sols;
    if (dim <= 8) sols = box_vi_solutions(m, lo, hi);
    if (dim <= 8 && !sols.unique()) continue;

    ProblemInstance prob{
        {"skew", dim, 0, 0, 0.0, seed},
        LinearOpFamily({identity_op(dim)}, dim),
        {},
        {},
        {}};
    prob.blocks.push_back({box_normal_cone(lo, hi), std::nullopt});
    OperatorBlock lin;
    lin.T = affine_operator(m, Vec::Zero(dim));
    lin.split =
        SplitOperator{linear_forward(m, lips), zero_operator(), whole_space()};
    prob.blocks.push_back(std::move(lin));

    if (dim <= 8) {
      Vec z_star = sols.solutions.front();
      Vec w_star = -(m * z_star).eval();
      ProductPoint p_star;
      p_star.z = z_star;
      p_star.w = {w_star};
      prob.oracle.z_star = z_star;
      prob.oracle.w_star = std::vector<Vec>{w_star};
      prob.oracle.project_se = [p_star](const ProductPoint&) { return p_star; };
    }

    prob.data = {{"M", m}, {"lo", lo}, {"hi", hi}};
    prob.block_tags = {"box-normal-cone", "skew-linear"};
    return prob;
  }
  throw DimensionError(
      "make_skew_saddle: no seed attempt produced a unique solution");
}

ProblemInstance make_problem(const GenParams& p) {
  if (p.kind == "affine") return make_affine_feasibility(p.dim, p.seed);
  if (p.kind == "lasso") return make_lasso(p.rows, p.cols, p.mu, p.seed);
  if (p.kind == "fused") return make_fused(p.rows, p.cols, p.mu, p.seed);
  if (p.kind == "skew") return make_skew_saddle(p.dim, p.seed);
  throw DimensionError("make_problem: unknown kind '" + p.kind + "'");
}

std::optional<double> oracle_distance(const ProblemInstance& prob,
                                      const ProductPoint& p0,
                                      const GammaMetric& m) {
  if (!prob.oracle.has_projection()) return std::nullopt;
  return gamma_norm(p0 - prob.oracle.project_se(p0), m);
}

std::vector<BlockTriple> consistent_triples(const ProblemInstance& prob,
                                            const Vec& z,
                                            const std::vector<Vec>& w,
                                            double lambda) {
  const auto& f = prob.family;
  const int n = f.n();
  if (static_cast<int>(w.size()) != n - 1)
    throw DimensionError("consistent_triples: block count mismatch");
  std::vector<BlockTriple> triples;
  triples.reserve(static_cast<size_t>(n));
  Vec y_n = Vec::Zero(f.domain_dim());
  for (int i = 0; i < n - 1; ++i) {
    BlockTriple t;
    t.x = f.apply(i, z);
    t.y = w[static_cast<size_t>(i)];
    t.lambda = lambda;
    y_n -= f.apply_adjoint(i, t.y);
    triples.push_back(std::move(t));
  }
  BlockTriple last;
  last.x = z;
  last.y = y_n;
  last.lambda = lambda;
  triples.push_back(std::move(last));
  return triples;
}

bool supports_variant(const ProblemInstance& prob, VariantKind kind) {
  bool any_split = false;
  for (const auto& b : prob.blocks) {
    if (!b.split) {
      if (!b.T) return false;
      continue;
    }
    any_split = true;
    if (kind == VariantKind::ForwardBackward &&
        b.split->F.regularity != Regularity::Cocoercive)
      return false;
  }
  return any_split;
}

ModulusAudit audit_variant_regularity(const ProblemInstance& prob,
                                      VariantKind kind, int pairs,
                                      std::uint64_t seed) {
  ModulusAudit total;
  for (int i = 0; i < prob.n(); ++i) {
    const auto& b = prob.blocks[static_cast<size_t>(i)];
    if (!b.split) continue;
    Index dim = prob.family.block_dim(i);
    ModulusAudit a =
        kind == VariantKind::ForwardBackward
            ? audit_cocoercivity(b.split->F, dim, pairs,
                                 SplitMix64::mix(seed, i))
            : audit_lipschitz(b.split->F, dim, pairs, SplitMix64::mix(seed, i));
    total.pairs += a.pairs;
    total.violations += a.violations;
    total.worst_violation = std::min(total.worst_violation, a.worst_violation);
  }
  return total;
}

SolveResult solve(const ProblemInstance& prob, const SolverConfig& cfg,
                  const InnerSolver& inner, const ProductPoint& p0,
                  const IterationObserver& observer) {
  return solve(prob.family, prob.blocks, cfg, inner, p0, observer);
}

}  // namespace psplit
