#include "psplit/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace psplit {

double Residuals::primal_max() const {
  double m = 0.0;
  for (double v : primal) m = std::max(m, v);
  return m;
}

bool Residuals::within(double rho) const {
  return dual <= rho && primal_max() <= rho && eps_sum <= rho;
}

Residuals residuals(const std::vector<BlockTriple>& blocks,
                    const LinearOpFamily& f) {
  const int n = f.n();
  if (static_cast<int>(blocks.size()) != n)
    throw DimensionError("residuals: expected one triple per block");
  Residuals r;
  const auto& last = blocks[static_cast<size_t>(n - 1)];
  Vec dual = last.y;
  r.primal.reserve(static_cast<size_t>(n - 1));
  for (int i = 0; i < n - 1; ++i) {
    const auto& t = blocks[static_cast<size_t>(i)];
    dual += f.apply_adjoint(i, t.y);
    r.primal.push_back((t.x - f.apply(i, last.x)).norm());
  }
  r.dual = dual.norm();
  for (const auto& t : blocks) r.eps_sum += t.eps;
  return r;
}

double constant_c(int n, double max_gnorm_sq, double gamma, double sigma,
                  double lambda_lo, double lambda_hi) {
  if (n < 2 || !(max_gnorm_sq > 0.0) || !(gamma > 0.0) || !(sigma < 1.0) ||
      !(lambda_lo > 0.0) || !(lambda_hi >= lambda_lo))
    throw DimensionError("constant_c: invalid inputs");
  double lam = std::min(lambda_lo, 1.0 / lambda_hi);
  return n * max_gnorm_sq *
         (4.0 * std::max(1.0, 1.0 / gamma) / ((1.0 - sigma * sigma) * lam));
}

double omega_bound(double alpha_bar, double beta_bar, double s_bar) {
  if (alpha_bar < 0.0 || beta_bar < 0.0 || s_bar < 0.0)
    throw DimensionError("omega_bound: inputs must be >= 0");
  return (1.0 + alpha_bar) *
         ((1.0 + beta_bar) * (1.0 + alpha_bar * (1.0 + beta_bar)) + s_bar);
}

ComplexityBounds complexity_bounds(int k, const Certificate& cert, int n,
                                   double max_gnorm_sq, double gamma,
                                   double sigma, double lambda_lo,
                                   double lambda_hi) {
  if (k < 0) throw DimensionError("complexity_bounds: k must be >= 0");
  double lam = std::min(lambda_lo, 1.0 / lambda_hi);
  double one_minus = 1.0 - sigma * sigma;
  double maxg = std::max(1.0, 1.0 / gamma);
  double lead = n * max_gnorm_sq;
  double sqrt_k1 = std::sqrt(static_cast<double>(k) + 1.0);

  ComplexityBounds b;
  b.dual = lead * cert.d0 / sqrt_k1 *
           (4.0 * std::sqrt(gamma) * maxg * std::sqrt(cert.omega) /
            (one_minus * lam));
  b.primal = lead * cert.d0 / sqrt_k1 *
             (4.0 * maxg * std::sqrt(cert.omega) / (one_minus * lam));
  b.eps = lead * cert.d0 * cert.d0 / (static_cast<double>(k) + 1.0) *
          (4.0 * sigma * sigma * maxg * cert.omega / (one_minus * one_minus * lam));
  return b;
}

AuditReport audit_trace(const std::vector<IterationRecord>& trace,
                        const AuditInputs& in) {
  AuditReport rep;
  rep.iterations = static_cast<int>(trace.size());
  rep.omega = omega_bound(in.alpha_bar, in.beta_bar, in.s_bar);
  rep.c = constant_c(in.n, in.max_gnorm_sq, in.gamma, in.sigma, in.lambda_lo,
                     in.lambda_hi);
  if (trace.empty()) return rep;

  double scale = 1.0;
  for (const auto& r : trace) scale = std::max(scale, 1.0 + r.dist_p0 * r.dist_p0);
  const double tol = in.tol * scale;

  // (i) Distance expansion between consecutive iterates.
  for (size_t j = 0; j + 1 < trace.size(); ++j) {
    const auto& a = trace[j];
    const auto& b = trace[j + 1];
    double lhs = b.dist_p0 * b.dist_p0;
    double rhs = a.dist_p0 * a.dist_p0 + a.step_norm * a.step_norm;
    if (lhs < rhs - tol)
      rep.flags.push_back({"fejer_expansion", a.k, lhs, rhs});
  }

  // Per-iteration eps bound: sum eps <= sigma^2/(1-sigma^2) c ||p^{k+1}-p~k||^2.
  double eps_factor = in.sigma * in.sigma / (1.0 - in.sigma * in.sigma);
  for (const auto& r : trace) {
    double bound = eps_factor * rep.c * r.proj_gap * r.proj_gap;
    if (r.eps_sum > bound + tol)
      rep.flags.push_back({"eps_bound", r.k, r.eps_sum, bound});
  }

  if (in.d0) {
    const double d0 = *in.d0;
    // (ii) Running sum of squared projection gaps against Omega d0^2.
    double run = 0.0;
    for (const auto& r : trace) {
      run += r.proj_gap * r.proj_gap;
      if (run > rep.omega * d0 * d0 + tol)
        rep.flags.push_back({"gap_summability", r.k, run, rep.omega * d0 * d0});
    }
    // (iii) Min-over-l residuals against the complexity certificates. Distance
    // bound ||p^k - p^0|| <= d0 is audited alongside.
    Certificate cert{rep.c, rep.omega, d0};
    double min_dual = std::numeric_limits<double>::infinity();
    double min_primal = min_dual, min_eps = min_dual;
    for (const auto& r : trace) {
      if (in.cert_k_max >= 0 && r.k > in.cert_k_max) break;
      min_dual = std::min(min_dual, r.res_dual);
      min_primal = std::min(min_primal, r.res_primal_max);
      min_eps = std::min(min_eps, r.eps_sum);
      ComplexityBounds b =
          complexity_bounds(r.k, cert, in.n, in.max_gnorm_sq, in.gamma,
                            in.sigma, in.lambda_lo, in.lambda_hi);
      if (min_dual > b.dual + tol)
        rep.flags.push_back({"cert_dual", r.k, min_dual, b.dual});
      if (min_primal > b.primal + tol)
        rep.flags.push_back({"cert_primal", r.k, min_primal, b.primal});
      if (!in.skip_eps_cert && min_eps > b.eps + tol)
        rep.flags.push_back({"cert_eps", r.k, min_eps, b.eps});
      if (r.dist_p0 > d0 + tol)
        rep.flags.push_back({"distance_bound", r.k, r.dist_p0, d0});
    }
  }
  return rep;
}

}  // namespace psplit
