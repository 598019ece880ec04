#pragma once

#include <cstdint>
#include <functional>

#include "psplit/diagnostics.hpp"
#include "psplit/operators.hpp"
#include "psplit/product_space.hpp"
#include "psplit/projection.hpp"
#include "psplit/separator.hpp"

namespace psplit {

// k -> value, with the declared bounds the convergence assumptions need:
// sup_k alpha_k for the first extrapolation, and additionally an upper bound
// on sum beta_k^2 for the second one.
struct InertiaSchedule {
  std::function<double(int)> value;
  double bound = 0.0;
  double sq_sum_bound = 0.0;
};

InertiaSchedule constant_alpha(double alpha);
// beta_k = beta0 / (k + 1); sum beta_k^2 = beta0^2 pi^2 / 6.
InertiaSchedule harmonic_beta(double beta0);
InertiaSchedule zero_schedule();

struct SolverConfig {
  double sigma = 0.0;          // relative-error parameter, in [0, 1)
  double gamma = 1.0;          // weight of the z-block in the metric
  InertiaSchedule alpha = constant_alpha(0.3);
  InertiaSchedule beta = harmonic_beta(1.0);
  double lambda_lo = 1.0;
  double lambda_hi = 1.0;
  std::function<double(int k, int i)> lambda_rule;  // defaults to 1
  double rho_tol = 1e-8;       // approximate-solution tolerance (0 = exact test)
  int max_iter = 10000;
  bool parallel_blocks = false;  // OpenMP over the n subproblems

  GammaMetric metric() const { return GammaMetric(gamma); }
  double lambda(int k, int i) const;
  void validate() const;
};

// Inputs of one block subproblem at iteration k.
struct BlockWork {
  int k = 0;
  int i = 0;
  double lambda = 1.0;
  double sigma = 0.0;
  Vec target_z;  // G_i z~k
  Vec target_w;  // w~_i^k (implied block for i = n-1)
};

using InnerSolver =
    std::function<BlockTriple(const OperatorBlock&, const BlockWork&)>;

struct CriterionResult {
  double lhs = 0.0;
  double rhs = 0.0;
  bool ok = false;
  double slack() const { return rhs - lhs; }
};

// ||lambda y + x - (tz + lambda tw)||^2 + 2 lambda eps
//   <= sigma^2 (||tz - x||^2 + ||lambda (tw - y)||^2).
CriterionResult error_criterion(const BlockTriple& t, const Vec& target_z,
                                const Vec& target_w, double sigma);

// x = (lambda T + I)^{-1}(tz + lambda tw), y = (tz + lambda tw - x)/lambda,
// eps = 0; satisfies the criterion for any sigma.
BlockTriple exact_prox_inner(const OperatorBlock& block, double lambda,
                             const Vec& target_z, const Vec& target_w);

InnerSolver make_exact_inner();
// Exact step plus a seeded controlled perturbation, accepted only when the
// criterion passes; exercises genuinely positive eps on subdifferential
// blocks via the Fenchel-Young gap.
InnerSolver make_perturbing_inner(std::uint64_t seed);

struct SolverState {
  int k = 0;
  ProductPoint p_prev, p_curr, p0;
  std::vector<IterationRecord> trace;
};

SolverState make_initial_state(const ProductPoint& p0);

struct Extrapolation {
  ProductPoint p_hat;
  ProductPoint p_tilde;
  Vec w_tilde_n;
};

// p^k + alpha (p^k - p^{k-1}), then + beta (p^ - p^0), with the implied dual
// block of the result.
Extrapolation extrapolate(const SolverState& s, double alpha_k, double beta_k,
                          const LinearOpFamily& f);

struct ReturnCheck {
  bool triggered = false;
  Residuals res;
};

ReturnCheck return_condition(const std::vector<BlockTriple>& blocks,
                             const LinearOpFamily& f, double rho);

// Everything one iteration produced, for audit observers.
struct IterationContext {
  int k;
  const std::vector<BlockTriple>& triples;
  const std::vector<CriterionResult>& criteria;
  const Separator& separator;
  const Residuals& res;
  const ProductPoint& p0;
  const ProductPoint& p_curr;
  const ProductPoint& p_hat;
  const ProductPoint& p_tilde;
  const ProductPoint& p_next;
  const Vec& w_tilde_n;
  double phi_tilde;
};

using IterationObserver = std::function<void(const IterationContext&)>;

enum class StepOutcome { Continue, Returned };

struct IterateResult {
  StepOutcome outcome = StepOutcome::Continue;
  Residuals res;
  // Filled when the return condition fired: (z, w) = (x_n, y_1..y_{n-1}).
  Vec z;
  std::vector<Vec> w;
};

IterateResult iterate(SolverState& state, const LinearOpFamily& f,
                      const std::vector<OperatorBlock>& blocks,
                      const SolverConfig& cfg, const InnerSolver& inner,
                      const IterationObserver& observer = {});

enum class SolveStatus { Returned, MaxIterations };

struct SolveResult {
  SolveStatus status = SolveStatus::MaxIterations;
  int iterations = 0;
  Vec z;                    // x_n of the final triples
  std::vector<Vec> w;       // y_1..y_{n-1} of the final triples
  Residuals final_residuals;
  ProductPoint p_final;     // p^k at stop
  std::vector<IterationRecord> trace;
};

SolveResult solve(const LinearOpFamily& f,
                  const std::vector<OperatorBlock>& blocks,
                  const SolverConfig& cfg, const InnerSolver& inner,
                  const ProductPoint& p0,
                  const IterationObserver& observer = {});

}  // namespace psplit
