#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "semiprox/harness.hpp"

namespace fs = std::filesystem;
using namespace semiprox;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 2;
constexpr int kExitSolverError = 3;

int cmd_generate(const SyntheticSpec& spec, std::uint64_t seed, const std::string& out) {
  SyntheticData data = generate_synthetic(spec, seed);
  fs::create_directories(out);

  std::ofstream tsv(fs::path(out) / "data.tsv");
  for (const auto& t : data.obs.triples) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%zu\t%zu\t%.17g\t0\n", t.i + 1, t.j + 1, t.value);
    tsv << buf;
  }

  std::ofstream truth(fs::path(out) / "truth.csv");
  for (std::size_t i = 0; i < data.truth.rows; ++i) {
    for (std::size_t j = 0; j < data.truth.cols; ++j) {
      char buf[48];
      std::snprintf(buf, sizeof buf, "%.17g", data.truth(i, j));
      truth << buf << (j + 1 < data.truth.cols ? "," : "\n");
    }
  }

  nlohmann::json meta;
  meta["m"] = spec.m;
  meta["n"] = spec.n;
  meta["rank"] = spec.rank;
  meta["obs_fraction"] = spec.obs_fraction;
  meta["noise"] = spec.noise;
  meta["seed"] = seed;
  meta["observed"] = data.obs.count();
  std::ofstream(fs::path(out) / "meta.json") << meta.dump(2) << "\n";

  std::cout << "wrote " << data.obs.count() << " observations to " << out << "\n";
  return kExitOk;
}

int cmd_solve(const std::string& config_path, const std::string& solver_override,
              long seed_override, const std::string& out_override) {
  ExperimentConfig cfg;
  try {
    cfg = load_config(config_path);
    if (!solver_override.empty()) cfg.solvers = {solver_override};
    if (seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(seed_override);
    if (!out_override.empty()) cfg.output_dir = out_override;
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  }

  std::vector<SolverSummary> summaries;
  try {
    summaries = run_experiment(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return kExitSolverError;
  }

  bool any_failed = false;
  for (const SolverSummary& s : summaries) {
    std::printf("%-12s %-28s iters=%d lmo=%ld obj=%.6g obj_true=%.6g nmae=%.4g\n",
                s.solver.c_str(), s.status.c_str(), s.iters, s.lmo_calls,
                s.final_objective, s.final_objective_true, s.nmae_test);
    if (s.status.rfind("error", 0) == 0 || s.status.rfind("aborted", 0) == 0)
      any_failed = true;
  }
  std::cout << "traces written to " << cfg.output_dir << "\n";
  return any_failed ? kExitSolverError : kExitOk;
}

int cmd_bench(const std::string& config_path, const std::string& out_override,
              const std::vector<int>& fixed_steps) {
  ExperimentConfig base;
  try {
    base = load_config(config_path);
    if (!out_override.empty()) base.output_dir = out_override;
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  }

  struct Variant {
    std::string name;
    ExperimentConfig cfg;
  };
  std::vector<Variant> variants;

  ExperimentConfig decay = base;
  decay.inexact_mode = "decaying";
  decay.output_dir = (fs::path(base.output_dir) / "decay").string();
  variants.push_back({"decay", decay});
  for (int k : fixed_steps) {
    ExperimentConfig v = base;
    v.inexact_mode = "fixed-inner-steps";
    v.inexact_k = k;
    v.output_dir = (fs::path(base.output_dir) / ("k" + std::to_string(k))).string();
    variants.push_back({"k" + std::to_string(k), v});
  }

  std::vector<SolverSummary> all;
  bool any_failed = false;
  for (const Variant& v : variants) {
    std::cout << "=== variant " << v.name << " ===\n";
    try {
      std::vector<SolverSummary> rows = run_experiment(v.cfg);
      for (SolverSummary s : rows) {
        s.solver = s.solver + "/" + v.name;
        std::printf("%-20s %-20s lmo=%ld obj_true=%.6g\n", s.solver.c_str(),
                    s.status.c_str(), s.lmo_calls, s.final_objective_true);
        if (s.status.rfind("error", 0) == 0) any_failed = true;
        all.push_back(std::move(s));
      }
    } catch (const std::exception& e) {
      std::cerr << "variant " << v.name << " failed: " << e.what() << "\n";
      any_failed = true;
    }
  }

  fs::create_directories(base.output_dir);
  std::ofstream(fs::path(base.output_dir) / "summary.csv") << summary_csv(all);
  std::cout << "bench summary written to " << base.output_dir << "/summary.csv\n";
  return any_failed ? kExitSolverError : kExitOk;
}

int cmd_validate(const std::string& trace_path) {
  ValidationReport report = validate_trace_file(trace_path);
  for (const std::string& f : report.findings) std::cout << f << "\n";
  std::cout << (report.ok ? "VALID" : "INVALID") << "\n";
  return report.ok ? kExitOk : 1;
}

int cmd_info(const std::string& config_path) {
  ExperimentConfig cfg;
  try {
    cfg = load_config(config_path);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  }
  std::cout << "model: " << cfg.model << "\n";
  std::cout << "solvers:";
  for (const auto& s : cfg.solvers) std::cout << ' ' << s;
  std::cout << "\nseed: " << cfg.seed << "\nbudget: " << cfg.max_iters << " iters, "
            << cfg.max_lmo << " LMO calls\n";
  if (cfg.synthetic) {
    std::cout << "data: synthetic " << cfg.synthetic->m << "x" << cfg.synthetic->n
              << " rank " << cfg.synthetic->rank << "\n";
  } else if (cfg.ratings_path) {
    std::cout << "data: ratings " << *cfg.ratings_path << "\n";
  } else if (cfg.edges_path) {
    std::cout << "data: edges " << *cfg.edges_path << " (top_k=" << cfg.top_k << ")\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"semiprox: conditional-gradient-type solvers for doubly "
               "non-smooth composite minimization"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "generate a synthetic low-rank dataset");
  SyntheticSpec spec;
  std::uint64_t gen_seed = 42;
  std::string gen_out = "data";
  gen->add_option("--m", spec.m, "rows");
  gen->add_option("--n", spec.n, "cols");
  gen->add_option("--rank", spec.rank, "rank of the ground truth");
  gen->add_option("--obs-fraction", spec.obs_fraction, "observed fraction (0,1]");
  gen->add_option("--noise", spec.noise, "additive gaussian noise level");
  gen->add_option("--seed", gen_seed, "rng seed");
  gen->add_option("--out", gen_out, "output directory");

  // solve
  auto* solve = app.add_subcommand("solve", "run the configured solvers");
  std::string solve_cfg, solve_solver, solve_out;
  long solve_seed = -1;
  solve->add_option("--config", solve_cfg, "experiment config (JSON)")->required();
  solve->add_option("--solver", solve_solver, "restrict to one solver");
  solve->add_option("--seed", solve_seed, "override the config seed");
  solve->add_option("--out", solve_out, "override the output directory");

  // bench
  auto* bench = app.add_subcommand(
      "bench", "sweep inexactness strategies under a shared budget");
  std::string bench_cfg, bench_out;
  std::vector<int> bench_ks{2, 5, 10};
  bench->add_option("--config", bench_cfg, "experiment config (JSON)")->required();
  bench->add_option("--out", bench_out, "override the output directory");
  bench->add_option("--fixed-steps", bench_ks, "fixed inner-step counts to sweep");

  // validate
  auto* validate = app.add_subcommand("validate", "check invariants of a trace file");
  std::string trace_path;
  validate->add_option("--trace", trace_path, "trace CSV to validate")->required();

  // info
  auto* info = app.add_subcommand("info", "print the resolved configuration");
  std::string info_cfg;
  info->add_option("--config", info_cfg, "experiment config (JSON)")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_generate(spec, gen_seed, gen_out);
    if (solve->parsed()) return cmd_solve(solve_cfg, solve_solver, solve_seed, solve_out);
    if (bench->parsed()) return cmd_bench(bench_cfg, bench_out, bench_ks);
    if (validate->parsed()) return cmd_validate(trace_path);
    if (info->parsed()) return cmd_info(info_cfg);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolverError;
  }
  return kExitOk;
}
