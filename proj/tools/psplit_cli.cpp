// Command-line front door: generate problem instances, run the solver
// variants, audit recorded traces, and run the invariant battery.

#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <string>

#include "psplit/io.hpp"
#include "psplit/problems.hpp"
#include "psplit/rng.hpp"

using namespace psplit;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitSolverError = 1;
constexpr int kExitBadInput = 2;

struct ProblemFlags {
  std::string name = "lasso";
  int dim = 10;
  int rows = 8;
  int cols = 4;
  double mu = 0.5;
  std::uint64_t seed = 1;
  std::string file;  // when set, load instead of generating

  void add_to(CLI::App* cmd, bool with_file) {
    cmd->add_option("--problem", name,
                    "Problem family: affine | lasso | fused | skew");
    cmd->add_option("--dim", dim, "Dimension (affine, skew)");
    cmd->add_option("--rows", rows, "Design rows (lasso, fused)");
    cmd->add_option("--cols", cols, "Design cols (lasso, fused)");
    cmd->add_option("--mu", mu, "l1 weight (lasso, fused)");
    cmd->add_option("--seed", seed, "Instance seed (PS_SEED overrides)");
    if (with_file)
      cmd->add_option("--problem-file", file,
                      "Load a generated problem file instead");
  }

  ProblemInstance build() const {
    if (!file.empty()) return problem_from_json(read_json_file(file));
    GenParams p;
    p.kind = name;
    p.dim = dim;
    p.rows = rows;
    p.cols = cols;
    p.mu = mu;
    p.seed = seed;
    if (const char* env = std::getenv("PS_SEED"))
      p.seed = std::strtoull(env, nullptr, 10);
    return make_problem(p);
  }
};

struct SolveFlags {
  std::string variant = "generic";
  double sigma = 0.0;
  double alpha = 0.3;
  double beta0 = 1.0;
  double gamma = 1.0;
  double lambda = 1.0;
  double rho = 1e-8;
  int max_iter = 10000;
  double init_scale = 0.0;
  std::uint64_t init_seed = 9;
  bool parallel = false;
  bool force_variant = false;
  std::string trace_path;
  std::string summary_path;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--variant", variant, "generic | fb | tseng");
    cmd->add_option("--sigma", sigma, "Relative-error parameter in [0,1)");
    cmd->add_option("--alpha", alpha, "Constant inertia alpha_k");
    cmd->add_option("--beta0", beta0, "beta_k = beta0/(k+1); 0 disables");
    cmd->add_option("--gamma", gamma, "Metric weight of the z block");
    cmd->add_option("--lambda", lambda,
                    "Proximal step for plain-resolvent blocks");
    cmd->add_option("--rho", rho, "Return tolerance");
    cmd->add_option("--max-iter", max_iter, "Iteration cap");
    cmd->add_option("--init-scale", init_scale,
                    "Gaussian scale of p0 (0 = origin)");
    cmd->add_option("--init-seed", init_seed, "Seed for the initial point");
    cmd->add_flag("--parallel", parallel, "Solve blocks with OpenMP");
    cmd->add_flag("--force-variant", force_variant,
                  "Skip the regularity audit gate");
    cmd->add_option("--trace", trace_path, "Write the iteration trace CSV");
    cmd->add_option("--summary", summary_path, "Write the run summary JSON");
  }
};

ProductPoint initial_point(const ProblemInstance& prob, double scale,
                           std::uint64_t seed) {
  ProductPoint p0 = ProductPoint::zero(prob.family);
  if (scale > 0.0) {
    SplitMix64 rng(SplitMix64::mix(seed, 0x1417));
    p0.z = scale * rng.next_gaussian_vec(prob.family.domain_dim());
    for (int i = 0; i + 1 < prob.n(); ++i)
      p0.w[static_cast<size_t>(i)] =
          scale * rng.next_gaussian_vec(prob.family.block_dim(i));
  }
  return p0;
}

nlohmann::json config_echo(const SolveFlags& sf, const SolverConfig& cfg) {
  return {{"variant", sf.variant},
          {"sigma", cfg.sigma},
          {"gamma", cfg.gamma},
          {"alpha", sf.alpha},
          {"beta0", sf.beta0},
          {"lambda_lo", cfg.lambda_lo},
          {"lambda_hi", cfg.lambda_hi},
          {"rho", cfg.rho_tol},
          {"max_iter", cfg.max_iter},
          {"alpha_bar", cfg.alpha.bound},
          {"beta_bar", cfg.beta.bound},
          {"s_bar", cfg.beta.sq_sum_bound}};
}

int cmd_gen(const ProblemFlags& pf, const std::string& out) {
  auto prob = pf.build();
  write_json_file(out, problem_to_json(prob));
  std::printf("wrote %s (%s, n=%d)\n", out.c_str(), prob.params.kind.c_str(),
              prob.n());
  return kExitOk;
}

int cmd_solve(const ProblemFlags& pf, const SolveFlags& sf) {
  auto prob = pf.build();

  SolverConfig cfg;
  cfg.sigma = sf.sigma;
  cfg.gamma = sf.gamma;
  cfg.alpha = constant_alpha(sf.alpha);
  cfg.beta = sf.beta0 > 0.0 ? harmonic_beta(sf.beta0) : zero_schedule();
  cfg.rho_tol = sf.rho;
  cfg.max_iter = sf.max_iter;
  cfg.parallel_blocks = sf.parallel;
  cfg.lambda_lo = cfg.lambda_hi = sf.lambda;
  double lam = sf.lambda;
  cfg.lambda_rule = [lam](int, int) { return lam; };

  InnerSolver inner;
  if (sf.variant == "generic") {
    inner = make_exact_inner();
  } else if (sf.variant == "fb" || sf.variant == "tseng") {
    VariantKind kind = sf.variant == "fb" ? VariantKind::ForwardBackward
                                          : VariantKind::Tseng;
    if (!supports_variant(prob, kind)) {
      std::fprintf(stderr,
                   "error: %s steps are not declared compatible with this "
                   "problem's blocks\n",
                   sf.variant.c_str());
      if (!sf.force_variant) return kExitBadInput;
    }
    auto audit = audit_variant_regularity(prob, kind, 1000, 2024);
    if (!audit.passed()) {
      std::fprintf(stderr,
                   "error: randomized modulus audit failed (%d of %d pairs, "
                   "worst defect %.3e)%s\n",
                   audit.violations, audit.pairs, audit.worst_violation,
                   sf.force_variant ? " -- forced" : "");
      if (!sf.force_variant) return kExitBadInput;
    }
    VariantSetup setup;
    try {
      setup = make_variant_setup(prob.blocks, kind, sf.sigma);
    } catch (const DimensionError& e) {
      std::fprintf(stderr, "error: %s\n", e.what());
      return kExitBadInput;
    }
    apply_variant(cfg, setup);
    inner = setup.inner;
  } else {
    std::fprintf(stderr, "error: unknown variant '%s'\n", sf.variant.c_str());
    return kExitBadInput;
  }

  ProductPoint p0 = initial_point(prob, sf.init_scale, sf.init_seed);
  SolveResult res;
  try {
    res = solve(prob, cfg, inner, p0);
  } catch (const ContractError& e) {
    std::fprintf(stderr, "solver contract error: %s\n", e.what());
    return kExitSolverError;
  } catch (const InfeasibleProjectionError& e) {
    std::fprintf(stderr, "solver projection error: %s\n", e.what());
    return kExitSolverError;
  }

  if (!sf.trace_path.empty()) write_trace_csv(sf.trace_path, res.trace);

  nlohmann::json summary;
  summary["schema"] = "psplit-summary/1";
  summary["problem"] = problem_to_json(prob);
  summary["problem"].erase("data");
  summary["config"] = config_echo(sf, cfg);
  summary["result"] = {
      {"status",
       res.status == SolveStatus::Returned ? "returned" : "max_iterations"},
      {"iterations", res.iterations},
      {"res_dual", res.final_residuals.dual},
      {"res_primal_max", res.final_residuals.primal_max()},
      {"eps_sum", res.final_residuals.eps_sum}};
  summary["constants"] = {
      {"n", prob.n()},
      {"max_gnorm_sq", prob.family.max_op_norm_sq()},
      {"omega",
       omega_bound(cfg.alpha.bound, cfg.beta.bound, cfg.beta.sq_sum_bound)},
      {"c", constant_c(prob.n(), prob.family.max_op_norm_sq(), cfg.gamma,
                       cfg.sigma, cfg.lambda_lo, cfg.lambda_hi)}};
  if (auto d0 = oracle_distance(prob, p0, cfg.metric()))
    summary["constants"]["d0"] = *d0;
  if (!sf.summary_path.empty()) write_json_file(sf.summary_path, summary);

  std::printf("%s in %d iterations; residuals: dual %.3e, primal %.3e, eps "
              "%.3e\n",
              res.status == SolveStatus::Returned ? "returned"
                                                  : "hit max-iter",
              res.iterations, res.final_residuals.dual,
              res.final_residuals.primal_max(), res.final_residuals.eps_sum);
  return kExitOk;
}

int cmd_audit(const std::string& trace_path, const std::string& summary_path,
              std::optional<double> d0, AuditInputs in,
              const std::string& out) {
  auto trace = read_trace_csv(trace_path);
  if (!summary_path.empty()) {
    auto s = read_json_file(summary_path);
    const auto& cc = s.at("constants");
    const auto& cfg = s.at("config");
    in.n = cc.at("n");
    in.max_gnorm_sq = cc.at("max_gnorm_sq");
    in.gamma = cfg.at("gamma");
    in.sigma = cfg.at("sigma");
    in.lambda_lo = cfg.at("lambda_lo");
    in.lambda_hi = cfg.at("lambda_hi");
    in.alpha_bar = cfg.at("alpha_bar");
    in.beta_bar = cfg.at("beta_bar");
    in.s_bar = cfg.at("s_bar");
    if (cc.contains("d0")) in.d0 = cc.at("d0").get<double>();
    if (cfg.at("variant") == "tseng") in.skip_eps_cert = true;
  }
  if (d0) in.d0 = d0;  // explicit flag wins
  auto rep = audit_trace(trace, in);
  auto j = audit_report_to_json(rep);
  if (!out.empty())
    write_json_file(out, j);
  else
    std::printf("%s\n", j.dump(2).c_str());
  std::printf("audit: %d iterations, %zu flags\n", rep.iterations,
              rep.flags.size());
  return rep.clean() ? kExitOk : kExitSolverError;
}

struct VerifyCounts {
  int checks = 0;
  int failed = 0;
  void note(const char* what, bool ok, double value) {
    ++checks;
    if (!ok) ++failed;
    std::printf("  [%s] %-38s %.3e\n", ok ? "ok" : "FAIL", what, value);
  }
};

int cmd_verify(std::uint64_t seed) {
  VerifyCounts vc;
  GenParams specs[] = {{"affine", 10, 0, 0, 0.0, seed},
                       {"lasso", 0, 8, 4, 0.5, seed + 1},
                       {"fused", 0, 10, 6, 0.7, seed + 2},
                       {"skew", 4, 0, 0, 0.0, seed + 3}};
  for (const auto& gp : specs) {
    auto prob = make_problem(gp);
    std::printf("%s (seed %llu):\n", gp.kind.c_str(),
                static_cast<unsigned long long>(gp.seed));
    SplitMix64 rng(SplitMix64::mix(gp.seed, 0xfe1f));

    // Adjoint probes on every non-identity map.
    double worst = 0.0;
    for (int i = 0; i + 1 < prob.n(); ++i) {
      for (int t = 0; t < 50; ++t) {
        Vec x = rng.next_gaussian_vec(prob.family.domain_dim());
        Vec u = rng.next_gaussian_vec(prob.family.block_dim(i));
        double lhs = prob.family.apply(i, x).dot(u);
        double rhs = x.dot(prob.family.apply_adjoint(i, u));
        worst = std::max(worst, std::abs(lhs - rhs) / (1.0 + std::abs(lhs)));
      }
    }
    vc.note("adjoint probe", worst <= 1e-12, worst);

    // Firm nonexpansiveness of every resolvent.
    worst = 0.0;
    for (int i = 0; i < prob.n(); ++i) {
      if (!prob.blocks[static_cast<size_t>(i)].T) continue;
      const auto& op = *prob.blocks[static_cast<size_t>(i)].T;
      Index dim = prob.family.block_dim(i);
      for (int t = 0; t < 200; ++t) {
        Vec u = 2.0 * rng.next_gaussian_vec(dim);
        Vec v = 2.0 * rng.next_gaussian_vec(dim);
        Vec ju = resolve(op, 1.0, u);
        Vec jv = resolve(op, 1.0, v);
        worst =
            std::max(worst, (ju - jv).squaredNorm() - (ju - jv).dot(u - v));
      }
    }
    vc.note("resolvent firm nonexpansiveness", worst <= 1e-10, worst);

    // Oracle point solves the inclusion.
    if (prob.oracle.has_point()) {
      auto ts =
          consistent_triples(prob, *prob.oracle.z_star, *prob.oracle.w_star);
      auto r = residuals(ts, prob.family);
      double v = std::max(r.dual, r.primal_max());
      vc.note("oracle consistency", v <= 1e-8, v);
    }

    // Short audited run.
    SolverConfig cfg;
    cfg.rho_tol = 0.0;
    cfg.max_iter = 1000;
    auto p0 = initial_point(prob, 0.5, gp.seed);
    auto res = solve(prob, cfg, make_exact_inner(), p0);
    AuditInputs in;
    in.n = prob.n();
    in.max_gnorm_sq = prob.family.max_op_norm_sq();
    in.alpha_bar = cfg.alpha.bound;
    in.beta_bar = cfg.beta.bound;
    in.s_bar = cfg.beta.sq_sum_bound;
    in.d0 = oracle_distance(prob, p0, cfg.metric());
    auto rep = audit_trace(res.trace, in);
    vc.note("trace audit flags", rep.clean(),
            static_cast<double>(rep.flags.size()));
  }
  std::printf("verify: %d checks, %d failures\n", vc.checks, vc.failed);
  return vc.failed == 0 ? kExitOk : kExitSolverError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Inertial projective splitting solver for multi-term monotone "
               "inclusions"};
  app.require_subcommand(1);

  ProblemFlags gen_pf;
  std::string gen_out = "problem.json";
  auto* gen = app.add_subcommand("gen", "Generate a problem instance file");
  gen_pf.add_to(gen, false);
  gen->add_option("--out", gen_out, "Output path");

  ProblemFlags solve_pf;
  SolveFlags solve_sf;
  auto* solve_cmd =
      app.add_subcommand("solve", "Run a solver variant on a problem");
  solve_pf.add_to(solve_cmd, true);
  solve_sf.add_to(solve_cmd);

  std::string audit_trace_path, audit_summary, audit_out;
  double audit_d0 = -1.0;
  AuditInputs audit_in;
  auto* audit_cmd =
      app.add_subcommand("audit", "Audit a recorded iteration trace");
  audit_cmd->add_option("--trace", audit_trace_path, "Trace CSV")->required();
  audit_cmd->add_option("--summary", audit_summary,
                        "Summary JSON with the config echo");
  audit_cmd->add_option("--d0", audit_d0,
                        "Distance of p0 to the solution set");
  audit_cmd->add_option("--n", audit_in.n, "Number of blocks");
  audit_cmd->add_option("--max-gnorm-sq", audit_in.max_gnorm_sq,
                        "max ||G_i||^2");
  audit_cmd->add_option("--gamma", audit_in.gamma, "Metric weight");
  audit_cmd->add_option("--sigma", audit_in.sigma, "Relative-error parameter");
  audit_cmd->add_option("--lambda-lo", audit_in.lambda_lo, "Step lower bound");
  audit_cmd->add_option("--lambda-hi", audit_in.lambda_hi, "Step upper bound");
  audit_cmd->add_option("--alpha-bar", audit_in.alpha_bar, "sup alpha_k");
  audit_cmd->add_option("--beta-bar", audit_in.beta_bar, "sup beta_k");
  audit_cmd->add_option("--s-bar", audit_in.s_bar, "sum beta_k^2 bound");
  audit_cmd->add_option("--out", audit_out, "Write the report JSON here");

  std::uint64_t verify_seed = 101;
  auto* verify_cmd = app.add_subcommand(
      "verify", "Run the invariant battery on seeded instances");
  verify_cmd->add_option("--seed", verify_seed, "Base seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_gen(gen_pf, gen_out);
    if (solve_cmd->parsed()) return cmd_solve(solve_pf, solve_sf);
    if (audit_cmd->parsed())
      return cmd_audit(
          audit_trace_path, audit_summary,
          audit_d0 >= 0.0 ? std::optional<double>(audit_d0) : std::nullopt,
          audit_in, audit_out);
    if (verify_cmd->parsed()) return cmd_verify(verify_seed);
  } catch (const DimensionError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitBadInput;
  } catch (const ContractError& e) {
    std::fprintf(stderr, "solver contract error: %s\n", e.what());
    return kExitSolverError;
  } catch (const InfeasibleProjectionError& e) {
    std::fprintf(stderr, "solver projection error: %s\n", e.what());
    return kExitSolverError;
  } catch (const nlohmann::json::exception& e) {
    std::fprintf(stderr, "error: malformed file: %s\n", e.what());
    return kExitBadInput;
  }
  return kExitBadInput;
}
