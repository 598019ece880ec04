#include "psplit/core.hpp"

#include <cmath>
#include <exception>
#include <string>

#include "psplit/rng.hpp"

namespace psplit {

namespace {
// Once the separator gradient is this small relative to the iterate scale,
// the return test is met up to floating-point exhaustion.
constexpr double kZeroGradGuard = 1e-28;
constexpr int kPerturbTries = 50;
}  // namespace

InertiaSchedule constant_alpha(double alpha) {
  if (alpha < 0.0) throw DimensionError("constant_alpha: alpha must be >= 0");
  return {[alpha](int) { return alpha; }, alpha, 0.0};
}

InertiaSchedule harmonic_beta(double beta0) {
  if (beta0 < 0.0) throw DimensionError("harmonic_beta: beta0 must be >= 0");
  return {[beta0](int k) { return beta0 / (k + 1.0); }, beta0,
          beta0 * beta0 * M_PI * M_PI / 6.0};
}

InertiaSchedule zero_schedule() {
  return {[](int) { return 0.0; }, 0.0, 0.0};
}

double SolverConfig::lambda(int k, int i) const {
  double v = lambda_rule ? lambda_rule(k, i) : 1.0;
  if (!(v >= lambda_lo && v <= lambda_hi))
    throw DimensionError("SolverConfig: lambda_rule left [lambda_lo, lambda_hi]");
  return v;
}

void SolverConfig::validate() const {
  if (!(sigma >= 0.0 && sigma < 1.0))
    throw DimensionError("SolverConfig: sigma must lie in [0, 1)");
  if (!(gamma > 0.0)) throw DimensionError("SolverConfig: gamma must be > 0");
  if (!alpha.value || !beta.value)
    throw DimensionError("SolverConfig: inertia schedules must be set");
  if (alpha.bound < 0.0 || beta.bound < 0.0 || beta.sq_sum_bound < 0.0)
    throw DimensionError("SolverConfig: inertia bounds must be >= 0");
  if (!(lambda_lo > 0.0 && lambda_hi >= lambda_lo))
    throw DimensionError("SolverConfig: need 0 < lambda_lo <= lambda_hi");
  if (rho_tol < 0.0) throw DimensionError("SolverConfig: rho_tol must be >= 0");
  if (max_iter < 0) throw DimensionError("SolverConfig: max_iter must be >= 0");
}

CriterionResult error_criterion(const BlockTriple& t, const Vec& target_z,
                                const Vec& target_w, double sigma) {
  Vec e = t.lambda * t.y + t.x - (target_z + t.lambda * target_w);
  double lhs = e.squaredNorm() + 2.0 * t.lambda * t.eps;
  double rhs = sigma * sigma *
               ((target_z - t.x).squaredNorm() +
                (t.lambda * (target_w - t.y)).squaredNorm());
  double scale = 1.0 + target_z.squaredNorm() +
                 (t.lambda * target_w).squaredNorm() + rhs;
  CriterionResult r{lhs, rhs, false};
  r.ok = lhs <= rhs + 1e-12 * scale;
  return r;
}

BlockTriple exact_prox_inner(const OperatorBlock& block, double lambda,
                             const Vec& target_z, const Vec& target_w) {
  if (!block.T)
    throw ContractError("exact_prox_inner: block exposes no resolvent");
  Vec u = target_z + lambda * target_w;
  BlockTriple t;
  t.x = resolve(*block.T, lambda, u);
  t.y = (u - t.x) / lambda;
  t.eps = 0.0;
  t.lambda = lambda;
  return t;
}

InnerSolver make_exact_inner() {
  return [](const OperatorBlock& block, const BlockWork& w) {
    return exact_prox_inner(block, w.lambda, w.target_z, w.target_w);
  };
}

InnerSolver make_perturbing_inner(std::uint64_t seed) {
  return [seed](const OperatorBlock& block, const BlockWork& w) {
    BlockTriple exact =
        exact_prox_inner(block, w.lambda, w.target_z, w.target_w);
    if (w.sigma <= 0.0) return exact;
    double rhs0 = w.sigma * w.sigma *
                  ((w.target_z - exact.x).squaredNorm() +
                   (w.lambda * (w.target_w - exact.y)).squaredNorm());
    if (rhs0 <= 1e-24) return exact;

    SplitMix64 rng(SplitMix64::mix(SplitMix64::mix(seed, w.k), w.i));
    Vec d = rng.next_gaussian_vec(exact.x.size());
    double dn = d.norm();
    if (dn == 0.0) return exact;
    d /= dn;

    const bool subdiff = block.T->kind == OracleKind::Subdifferential &&
                         block.T->conjugate.has_value();
    double s = 0.5 * std::sqrt(rhs0);
    for (int t = 0; t < kPerturbTries; ++t, s *= 0.5) {
      BlockTriple cand;
      cand.lambda = w.lambda;
      if (subdiff) {
        // Move x off the graph and account for it exactly through the
        // Fenchel-Young gap; y stays a true subgradient at the exact x.
        cand.x = exact.x + s * d;
        cand.y = exact.y;
        double gap = fenchel_young_gap(*block.T->conjugate, cand.x, cand.y);
        if (std::isinf(gap)) continue;
        cand.eps = gap;
      } else {
        Vec u = w.target_z + w.lambda * w.target_w + s * d;
        cand.x = resolve(*block.T, w.lambda, u);
        cand.y = (u - cand.x) / w.lambda;
        cand.eps = 0.0;
      }
      if (error_criterion(cand, w.target_z, w.target_w, w.sigma).ok)
        return cand;
    }
    return exact;
  };
}

SolverState make_initial_state(const ProductPoint& p0) {
  SolverState s;
  s.p_prev = p0;
  s.p_curr = p0;
  s.p0 = p0;
  return s;
}

Extrapolation extrapolate(const SolverState& s, double alpha_k, double beta_k,
                          const LinearOpFamily& f) {
  if (alpha_k < 0.0 || beta_k < 0.0)
    throw DimensionError("extrapolate: inertia parameters must be >= 0");
  Extrapolation e;
  e.p_hat = s.p_curr + alpha_k * (s.p_curr - s.p_prev);
  e.p_tilde = e.p_hat + beta_k * (e.p_hat - s.p0);
  e.w_tilde_n = implied_dual_block(e.p_tilde, f);
  return e;
}

ReturnCheck return_condition(const std::vector<BlockTriple>& blocks,
                             const LinearOpFamily& f, double rho) {
  ReturnCheck c;
  c.res = residuals(blocks, f);
  c.triggered = c.res.within(rho);
  return c;
}

namespace {

void fill_solution(IterateResult& out, const std::vector<BlockTriple>& triples,
                   int n) {
  out.z = triples[static_cast<size_t>(n - 1)].x;
  out.w.clear();
  out.w.reserve(static_cast<size_t>(n - 1));
  for (int i = 0; i < n - 1; ++i)
    out.w.push_back(triples[static_cast<size_t>(i)].y);
}

}  // namespace

IterateResult iterate(SolverState& state, const LinearOpFamily& f,
                      const std::vector<OperatorBlock>& blocks,
                      const SolverConfig& cfg, const InnerSolver& inner,
                      const IterationObserver& observer) {
  const int n = f.n();
  if (static_cast<int>(blocks.size()) != n)
    throw DimensionError("iterate: expected one operator block per map");
  const GammaMetric metric = cfg.metric();
  const int k = state.k;

  const double alpha_k = cfg.alpha.value(k);
  const double beta_k = cfg.beta.value(k);
  Extrapolation ext = extrapolate(state, alpha_k, beta_k, f);

  std::vector<BlockTriple> triples(static_cast<size_t>(n));
  std::vector<CriterionResult> criteria(static_cast<size_t>(n));
  std::vector<std::exception_ptr> errors(static_cast<size_t>(n));

#pragma omp parallel for if (cfg.parallel_blocks) schedule(dynamic)
  for (int i = 0; i < n; ++i) {
    try {
      BlockWork work;
      work.k = k;
      work.i = i;
      work.lambda = cfg.lambda(k, i);
      work.sigma = cfg.sigma;
      work.target_z = f.apply(i, ext.p_tilde.z);
      work.target_w =
          i == n - 1 ? ext.w_tilde_n : ext.p_tilde.w[static_cast<size_t>(i)];
      BlockTriple t = inner(blocks[static_cast<size_t>(i)], work);
      CriterionResult cr =
          error_criterion(t, work.target_z, work.target_w, cfg.sigma);
      if (!cr.ok)
        throw ContractError("inner solver violated the error criterion at k=" +
                            std::to_string(k) + ", block " + std::to_string(i) +
                            " (lhs=" + std::to_string(cr.lhs) +
                            ", rhs=" + std::to_string(cr.rhs) + ")");
      triples[static_cast<size_t>(i)] = std::move(t);
      criteria[static_cast<size_t>(i)] = cr;
    } catch (...) {
      errors[static_cast<size_t>(i)] = std::current_exception();
    }
  }
  for (const auto& err : errors)
    if (err) std::rethrow_exception(err);

  IterateResult out;
  ReturnCheck check = return_condition(triples, f, cfg.rho_tol);
  out.res = check.res;
  fill_solution(out, triples, n);
  if (check.triggered) {
    out.outcome = StepOutcome::Returned;
    return out;
  }

  Separator sep = build_separator(triples, f, metric);
  const double phi_tilde = sep.eval(ext.p_tilde);
  const double gnsq = sep.grad_norm_sq();
  const double grad_scale = 1.0 + gamma_norm_sq(ext.p_tilde, metric);
  if (gnsq <= kZeroGradGuard * grad_scale) {
    // Criterion-satisfying triples cannot produce a vanishing gradient while
    // phi_k(p~k) > 0; only exhausted precision at a solution reaches here.
    if (phi_tilde > 1e-12 * grad_scale && check.res.eps_sum > cfg.rho_tol)
      throw ContractError(
          "zero separator gradient with positive eps at k=" +
          std::to_string(k));
    out.outcome = StepOutcome::Returned;
    return out;
  }

  ProductPoint p_next =
      project_p0_onto_intersection(state.p0, state.p_curr, sep, metric);

  IterationRecord rec;
  rec.k = k;
  rec.phi_tilde = phi_tilde;
  rec.grad_norm_sq = gnsq;
  rec.res_dual = check.res.dual;
  rec.res_primal_max = check.res.primal_max();
  rec.eps_sum = check.res.eps_sum;
  rec.dist_p0 = gamma_norm(state.p_curr - state.p0, metric);
  rec.step_norm = gamma_norm(p_next - state.p_curr, metric);
  rec.proj_gap = gamma_norm(p_next - ext.p_tilde, metric);
  double slack = criteria.front().slack();
  for (const auto& cr : criteria) slack = std::min(slack, cr.slack());
  rec.criterion_slack_min = slack;
  state.trace.push_back(rec);

  if (observer) {
    IterationContext ctx{k,         triples,    criteria, sep,
                         check.res, state.p0,   state.p_curr, ext.p_hat,
                         ext.p_tilde, p_next,   ext.w_tilde_n, phi_tilde};
    observer(ctx);
  }

  state.p_prev = std::move(state.p_curr);
  state.p_curr = std::move(p_next);
  ++state.k;
  return out;
}

SolveResult solve(const LinearOpFamily& f,
                  const std::vector<OperatorBlock>& blocks,
                  const SolverConfig& cfg, const InnerSolver& inner,
                  const ProductPoint& p0, const IterationObserver& observer) {
  cfg.validate();
  if (!inner) throw ContractError("solve: inner solver must be provided");
  SolverState state = make_initial_state(p0);

  SolveResult result;
  for (int k = 0; k < cfg.max_iter; ++k) {
    IterateResult step = iterate(state, f, blocks, cfg, inner, observer);
    result.z = std::move(step.z);
    result.w = std::move(step.w);
    result.final_residuals = step.res;
    if (step.outcome == StepOutcome::Returned) {
      result.status = SolveStatus::Returned;
      result.iterations = state.k;
      result.p_final = state.p_curr;
      result.trace = std::move(state.trace);
      return result;
    }
  }
  result.status = SolveStatus::MaxIterations;
  result.iterations = state.k;
  result.p_final = state.p_curr;
  result.trace = std::move(state.trace);
  return result;
}

}  // namespace psplit
