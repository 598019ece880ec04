#include "psplit/operators.hpp"

#include <cmath>
#include <limits>

#include "psplit/rng.hpp"

namespace psplit {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

Vec resolve(const MonotoneOracle& op, double lambda, const Vec& u) {
  if (!(lambda > 0.0))
    throw DimensionError("resolvent: lambda must be positive");
  if (!op.resolvent) throw ContractError("resolvent: oracle not provided");
  return op.resolvent(lambda, u);
}

double fenchel_young_gap(const ConjugatePair& pair, const Vec& x,
                         const Vec& u) {
  double gap = pair.f(x) + pair.f_star(u) - x.dot(u);
  return std::max(gap, 0.0);
}

bool eps_subdiff_check(const ConjugatePair& pair, const Vec& x, const Vec& u,
                       double eps) {
  double lhs = pair.f(x) + pair.f_star(u);
  if (std::isinf(lhs)) return false;
  return lhs <= x.dot(u) + eps + 1e-10;
}

bool eps_subdiff_check(const MonotoneOracle& op, const Vec& x, const Vec& u,
                       double eps) {
  if (!op.conjugate)
    throw UnsupportedCheckError("eps_subdiff_check: no conjugate pair");
  return eps_subdiff_check(*op.conjugate, x, u, eps);
}

ProjectableSet whole_space() {
  ProjectableSet s;
  s.project = [](const Vec& u) { return u; };
  return s;
}

ProjectableSet box_set(Vec lo, Vec hi) {
  if (lo.size() != hi.size())
    throw DimensionError("box_set: bound dimensions differ");
  for (Index j = 0; j < lo.size(); ++j)
    if (!(lo[j] <= hi[j])) throw DimensionError("box_set: lo > hi");
  ProjectableSet s;
  s.project = [lo = std::move(lo), hi = std::move(hi)](const Vec& u) {
    return u.cwiseMax(lo).cwiseMin(hi);
  };
  return s;
}

Vec soft_threshold(const Vec& u, double t) {
  Vec x(u.size());
  for (Index j = 0; j < u.size(); ++j) {
    double a = std::abs(u[j]) - t;
    x[j] = a > 0.0 ? (u[j] > 0.0 ? a : -a) : 0.0;
  }
  return x;
}

MonotoneOracle zero_operator() {
  MonotoneOracle op;
  op.kind = OracleKind::Subdifferential;
  op.resolvent = [](double, const Vec& u) { return u; };
  op.conjugate = ConjugatePair{
      [](const Vec&) { return 0.0; },
      [](const Vec& u) { return u.lpNorm<Eigen::Infinity>() <= 1e-12 ? 0.0 : kInf; }};
  return op;
}

MonotoneOracle l1_subdifferential(double mu) {
  if (!(mu > 0.0)) throw DimensionError("l1_subdifferential: mu must be > 0");
  MonotoneOracle op;
  op.kind = OracleKind::Subdifferential;
  op.resolvent = [mu](double lambda, const Vec& u) {
    return soft_threshold(u, lambda * mu);
  };
  // f = mu ||.||_1, f* = indicator of the sup-norm ball of radius mu.
  // A small relative slack keeps exact resolvent outputs inside the ball.
  op.conjugate = ConjugatePair{
      [mu](const Vec& x) { return mu * x.lpNorm<1>(); },
      [mu](const Vec& u) {
        return u.lpNorm<Eigen::Infinity>() <= mu * (1.0 + 1e-12) + 1e-12
                   ? 0.0
                   : kInf;
      }};
  return op;
}

MonotoneOracle box_normal_cone(Vec lo, Vec hi) {
  ProjectableSet box = box_set(lo, hi);
  MonotoneOracle op;
  op.kind = OracleKind::NormalCone;
  op.resolvent = [project = box.project](double, const Vec& u) {
    return project(u);
  };
  // f = indicator of the box, f* = support function.
  op.conjugate = ConjugatePair{
      [lo, hi](const Vec& x) {
        for (Index j = 0; j < x.size(); ++j)
          if (x[j] < lo[j] - 1e-12 || x[j] > hi[j] + 1e-12) return kInf;
        return 0.0;
      },
      [lo, hi](const Vec& u) {
        double s = 0.0;
        for (Index j = 0; j < u.size(); ++j) {
          double v = u[j] >= 0.0 ? u[j] * hi[j] : u[j] * lo[j];
          if (std::isnan(v)) v = 0.0;  // 0 * inf at a free coordinate
          if (std::isinf(v)) return kInf;
          s += v;
        }
        return s;
      }};
  return op;
}

MonotoneOracle affine_operator(Mat m, Vec q) {
  if (m.rows() != m.cols() || m.rows() != q.size())
    throw DimensionError("affine_operator: shape mismatch");
  MonotoneOracle op;
  op.kind = OracleKind::Affine;
  op.resolvent = [m = std::move(m), q = std::move(q)](double lambda,
                                                      const Vec& u) {
    Mat lhs = lambda * m + Mat::Identity(m.rows(), m.cols());
    return lhs.partialPivLu().solve(u - lambda * q).eval();
  };
  return op;
}

MonotoneOracle quadratic_gradient_oracle(const Mat& a, const Vec& b) {
  if (a.rows() != b.size())
    throw DimensionError("quadratic_gradient_oracle: shape mismatch");
  return affine_operator(a.transpose() * a, -a.transpose() * b);
}

ForwardOracle quadratic_gradient_forward(const Mat& a, const Vec& b) {
  if (a.rows() != b.size())
    throw DimensionError("quadratic_gradient_forward: shape mismatch");
  ForwardOracle f;
  double s = a.jacobiSvd().singularValues()(0);
  f.modulus = s * s;
  f.regularity = Regularity::Cocoercive;
  f.eval = [a, b](const Vec& z) { return (a.transpose() * (a * z - b)).eval(); };
  return f;
}

ForwardOracle linear_forward(Mat m, double lipschitz) {
  if (m.rows() != m.cols()) throw DimensionError("linear_forward: not square");
  if (!(lipschitz > 0.0))
    throw DimensionError("linear_forward: modulus must be > 0");
  ForwardOracle f;
  f.modulus = lipschitz;
  f.regularity = Regularity::Lipschitz;
  f.eval = [m = std::move(m)](const Vec& z) { return (m * z).eval(); };
  return f;
}

ForwardOracle zero_forward(double nominal_modulus) {
  ForwardOracle f;
  f.modulus = nominal_modulus;
  f.regularity = Regularity::Cocoercive;
  f.eval = [](const Vec& z) { return Vec::Zero(z.size()).eval(); };
  return f;
}

namespace {

template <typename Defect>
ModulusAudit run_audit(const ForwardOracle& f, Index dim, int pairs,
                       std::uint64_t seed, Defect defect) {
  ModulusAudit audit;
  audit.pairs = pairs;
  SplitMix64 rng(seed);
  for (int t = 0; t < pairs; ++t) {
    Vec x = f.domain.project(2.0 * rng.next_gaussian_vec(dim));
    Vec y = f.domain.project(2.0 * rng.next_gaussian_vec(dim));
    double d = defect(x, y);
    if (d < -1e-10) {
      ++audit.violations;
      audit.worst_violation = std::min(audit.worst_violation, d);
    }
  }
  return audit;
}

}  // namespace

ModulusAudit audit_cocoercivity(const ForwardOracle& f, Index dim, int pairs,
                                std::uint64_t seed) {
  return run_audit(f, dim, pairs, seed, [&](const Vec& x, const Vec& y) {
    Vec dF = f.eval(x) - f.eval(y);
    return dF.dot(x - y) - dF.squaredNorm() / f.modulus;
  });
}

ModulusAudit audit_lipschitz(const ForwardOracle& f, Index dim, int pairs,
                             std::uint64_t seed) {
  return run_audit(f, dim, pairs, seed, [&](const Vec& x, const Vec& y) {
    return f.modulus * (x - y).norm() - (f.eval(x) - f.eval(y)).norm();
  });
}

}  // namespace psplit
