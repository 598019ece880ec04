#pragma once

#include <optional>
#include <string>
#include <vector>

#include "psplit/separator.hpp"

namespace psplit {

// Approximate-solution residuals:
//   dual      = ||sum G_i^* y_i + y_n||
//   primal[i] = ||x_i - G_i x_n||, i < n
//   eps_sum   = sum eps_i
struct Residuals {
  double dual = 0.0;
  std::vector<double> primal;
  double eps_sum = 0.0;

  double primal_max() const;
  bool within(double rho) const;
};

Residuals residuals(const std::vector<BlockTriple>& blocks,
                    const LinearOpFamily& f);

// c = n max||G_i||^2 (4 max{1,1/gamma} / ((1-sigma^2) min{lambda_lo, 1/lambda_hi})).
double constant_c(int n, double max_gnorm_sq, double gamma, double sigma,
                  double lambda_lo, double lambda_hi);

// Omega = (1 + a)[(1 + b)[1 + a(1 + b)] + s].
double omega_bound(double alpha_bar, double beta_bar, double s_bar);

struct Certificate {
  double c = 0.0;
  double omega = 1.0;
  double d0 = 0.0;  // distance of p0 to the extended-solution set (or bound)
};

struct ComplexityBounds {
  double dual = 0.0;
  double primal = 0.0;
  double eps = 0.0;
};

// Per-k certificate values: dual and primal decay as 1/sqrt(k+1), the
// eps-sum as 1/(k+1).
ComplexityBounds complexity_bounds(int k, const Certificate& cert, int n,
                                   double max_gnorm_sq, double gamma,
                                   double sigma, double lambda_lo,
                                   double lambda_hi);

// One solver iteration, in the order the quantities are produced.
struct IterationRecord {
  int k = 0;
  double phi_tilde = 0.0;       // phi_k(p~k)
  double grad_norm_sq = 0.0;    // ||grad phi_k||^2_gamma
  double res_dual = 0.0;
  double res_primal_max = 0.0;
  double eps_sum = 0.0;
  double dist_p0 = 0.0;         // ||p^k - p^0||_gamma
  double step_norm = 0.0;       // ||p^{k+1} - p^k||_gamma
  double proj_gap = 0.0;        // ||p^{k+1} - p~k||_gamma
  double criterion_slack_min = 0.0;  // min over blocks of (rhs - lhs)
};

struct AuditInputs {
  int n = 2;
  double max_gnorm_sq = 1.0;
  double gamma = 1.0;
  double sigma = 0.0;
  double lambda_lo = 1.0;
  double lambda_hi = 1.0;
  double alpha_bar = 0.0;
  double beta_bar = 0.0;
  double s_bar = 0.0;
  std::optional<double> d0;   // enables the summability and certificate checks
  double tol = 1e-8;
  int cert_k_max = -1;        // limit certificate checks to k <= cert_k_max
  bool skip_eps_cert = false; // Tseng steps carry no eps clause
};

struct AuditFlag {
  std::string kind;
  int k = 0;
  double value = 0.0;
  double bound = 0.0;
};

struct AuditReport {
  int iterations = 0;
  double omega = 1.0;
  double c = 0.0;
  std::vector<AuditFlag> flags;
  bool clean() const { return flags.empty(); }
};

// Post-hoc audit of a recorded trace: the distance-expansion inequality, the
// summability of ||p^{k+1} - p~k||^2 against Omega d0^2, the eps bound
// sum eps <= sigma^2/(1-sigma^2) c ||p^{k+1} - p~k||^2, and the min-over-l
// residuals against the complexity certificates.
AuditReport audit_trace(const std::vector<IterationRecord>& trace,
                        const AuditInputs& in);

}  // namespace psplit
