// Command-line front end for the field-estimation experiment pipeline:
//   gen       emit the instance bundle (edges.txt, instance.csv)
//   solve     emit the reference solution (solution.csv)
//   run-djam  Monte Carlo gossip runs (aggregate.csv, per-trial traces)
//   run-admm  Monte Carlo ADMM runs, one or more rho values
//   compare   full pipeline: instance + solution + both algorithms
// Every subcommand takes --config <path>, --seed <u64>, --out <dir> and is
// byte-deterministic given those inputs.

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "djam/errors.hpp"
#include "djam/experiment.hpp"
#include "djam/io.hpp"

namespace fs = std::filesystem;

namespace {

struct CommonArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path,
                  "Experiment config file (flat key = value text)");
  cmd->add_option("--seed", args.seed,
                  "Override the instance seed (gen, solve) or the trial "
                  "master seed (run-djam, run-admm, compare)");
  cmd->add_option("--out", args.out_dir, "Output directory (created if absent)");
}

djam::ExperimentConfig load_config(const CommonArgs& args) {
  djam::ExperimentConfig cfg;
  if (!args.config_path.empty()) {
    cfg = djam::load_config_file(args.config_path);
  }
  return cfg;
}

std::ofstream open_out(const fs::path& dir, const std::string& name) {
  std::ofstream os(dir / name, std::ios::binary);
  if (!os) {
    throw djam::Error("cannot open output file: " + (dir / name).string());
  }
  return os;
}

std::string rho_tag(double rho) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", rho);
  return buf;
}

void write_instance_bundle(const fs::path& dir, const djam::FieldInstance& inst) {
  auto edges = open_out(dir, "edges.txt");
  djam::write_edge_list(edges, inst.net);
  auto csv = open_out(dir, "instance.csv");
  djam::write_instance_csv(csv, inst);
}

void write_run_outputs(const fs::path& dir, const djam::MonteCarloResult& result,
                       bool with_algorithm_column) {
  auto agg = open_out(dir, "aggregate.csv");
  djam::write_aggregate_csv(agg, result.series);

  for (const djam::SampleTrace& sample : result.sample_traces) {
    djam::TraceCsvColumns cols;
    cols.algorithm = with_algorithm_column;
    cols.rho = with_algorithm_column || sample.algorithm == "admm";
    std::string name = "trace_" + sample.algorithm;
    if (sample.algorithm == "admm") name += "_rho" + rho_tag(sample.rho);
    name += "_trial" + std::to_string(sample.trial) + ".csv";
    auto os = open_out(dir, name);
    djam::write_trace_header(os, cols);
    djam::write_trace_rows(os, sample.trace, sample.trial, cols,
                           sample.algorithm, sample.rho);
  }

  if (!result.log.empty()) {
    auto log = open_out(dir, "log.txt");
    for (const std::string& entry : result.log) {
      log << entry << '\n';
    }
  }
}

int run(int argc, char** argv) {
  CLI::App app{"Asynchronous single-neighbor gossip learning: experiment CLI"};
  app.require_subcommand(1);

  CommonArgs gen_args, solve_args, djam_args, admm_args, compare_args;
  double admm_rho = 0.0;

  CLI::App* gen = app.add_subcommand("gen", "Generate the field instance bundle");
  add_common(gen, gen_args);
  CLI::App* solve =
      app.add_subcommand("solve", "Solve the instance to reference accuracy");
  add_common(solve, solve_args);
  CLI::App* run_djam =
      app.add_subcommand("run-djam", "Monte Carlo gossip runs");
  add_common(run_djam, djam_args);
  CLI::App* run_admm = app.add_subcommand("run-admm", "Monte Carlo ADMM runs");
  add_common(run_admm, admm_args);
  CLI::Option* rho_opt = run_admm->add_option(
      "--rho", admm_rho, "Penalty parameter (default: the config's rho list)");
  CLI::App* compare = app.add_subcommand(
      "compare", "Full pipeline: instance, solution, gossip + ADMM sweep");
  add_common(compare, compare_args);

  CLI11_PARSE(app, argc, argv);

  if (gen->parsed()) {
    djam::ExperimentConfig cfg = load_config(gen_args);
    if (gen_args.seed) cfg.seed_instance = *gen_args.seed;
    fs::create_directories(gen_args.out_dir);
    write_instance_bundle(gen_args.out_dir, djam::generate_instance(cfg));
    return 0;
  }

  if (solve->parsed()) {
    djam::ExperimentConfig cfg = load_config(solve_args);
    if (solve_args.seed) cfg.seed_instance = *solve_args.seed;
    fs::create_directories(solve_args.out_dir);
    const djam::FieldInstance inst = djam::generate_instance(cfg);
    const djam::Solution sol = djam::solve_sync_jacobi(
        inst.net, djam::instance_losses(inst), 1e-13, 1000000);
    auto os = open_out(solve_args.out_dir, "solution.csv");
    djam::write_solution_csv(os, sol.theta_star);
    return 0;
  }

  if (run_djam->parsed()) {
    djam::ExperimentConfig cfg = load_config(djam_args);
    if (djam_args.seed) cfg.seed_trials = *djam_args.seed;
    cfg.algorithm = djam::Algorithm::Djam;
    fs::create_directories(djam_args.out_dir);
    write_run_outputs(djam_args.out_dir, djam::monte_carlo(cfg), false);
    return 0;
  }

  if (run_admm->parsed()) {
    djam::ExperimentConfig cfg = load_config(admm_args);
    if (admm_args.seed) cfg.seed_trials = *admm_args.seed;
    cfg.algorithm = djam::Algorithm::Admm;
    if (rho_opt->count() > 0) cfg.admm_rhos = {admm_rho};
    fs::create_directories(admm_args.out_dir);
    write_run_outputs(admm_args.out_dir, djam::monte_carlo(cfg), false);
    return 0;
  }

  djam::ExperimentConfig cfg = load_config(compare_args);
  if (compare_args.seed) cfg.seed_trials = *compare_args.seed;
  cfg.algorithm = djam::Algorithm::Both;
  fs::create_directories(compare_args.out_dir);
  const djam::MonteCarloResult result = djam::monte_carlo(cfg);
  write_instance_bundle(compare_args.out_dir, result.instance);
  auto sol = open_out(compare_args.out_dir, "solution.csv");
  djam::write_solution_csv(sol, result.solution.theta_star);
  write_run_outputs(compare_args.out_dir, result, true);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const djam::Error& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 1;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 1;
  }
}
