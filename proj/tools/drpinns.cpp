// drpinns command-line front end: train, ablate, oracle, eval.

#include "drpinns/errors.hpp"
#include "drpinns/fd_oracle.hpp"
#include "drpinns/network_io.hpp"
#include "drpinns/runner.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <malloc.h>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>

namespace {

using namespace drpinns;

void add_training_options(CLI::App& cmd, RunConfig& cfg, std::string& activation, std::string& init,
                          bool& no_bo, bool& no_adaptive, bool& paper_scale, bool& comparison) {
  cmd.add_option("--problem", cfg.problem, "ex1|ex2|ex3|ex4|ex4x or a problem JSON file")->required();
  cmd.add_option("--layers", cfg.hidden_layers, "hidden layers");
  cmd.add_option("--units", cfg.units, "units per hidden layer");
  cmd.add_option("--activation", activation, "tanh|relu|sigmoid");
  cmd.add_option("--lr", cfg.learning_rate, "initial learning rate");
  cmd.add_option("--lr-decay", cfg.lr_decay, "decay factor per --lr-decay-steps epochs");
  cmd.add_option("--lr-decay-steps", cfg.lr_decay_steps);
  cmd.add_option("--epochs", cfg.max_epochs, "maximum epochs");
  cmd.add_option("--loss-threshold", cfg.loss_threshold, "stop when successive losses differ by less");
  cmd.add_option("--stop-patience", cfg.stop_patience, "consecutive calm epochs required to stop");
  cmd.add_option("--update-period", cfg.dataset_update_period, "epochs between dataset updates");
  cmd.add_option("--update-delta", cfg.update_loss_delta, "resample when successive losses differ by less");
  cmd.add_option("--update-min-gap", cfg.update_min_gap, "minimum epochs between loss-triggered updates");
  cmd.add_option("--nf", cfg.n_interior, "interior collocation points");
  cmd.add_option("--ng", cfg.n_boundary, "boundary collocation points");
  cmd.add_option("--init", init, "initial interior sampling: lhs|normal");
  cmd.add_option("--bo-period", cfg.bo_period, "epochs between BO cycles");
  cmd.add_option("--bo-probe", cfg.bo_probe_epochs, "probe length in epochs");
  cmd.add_option("--bo-candidates", cfg.bo_candidates);
  cmd.add_option("--bo-penalty", cfg.bo_score_penalty, "penalty factor of the probe score");
  cmd.add_option("--resample-parents", cfg.resample_parents);
  cmd.add_option("--resample-children", cfg.resample_children);
  cmd.add_option("--resample-radius", cfg.resample_radius);
  cmd.add_option("--seed", cfg.seed);
  cmd.add_option("--oracle-nodes", cfg.oracle_nodes, "reference grid nodes per axis");
  cmd.add_option("--sample-nodes", cfg.sample_nodes, "solution_samples.csv nodes per axis");
  cmd.add_option("--error-every", cfg.error_every, "record the reference error every N epochs");
  cmd.add_flag("--no-bo", no_bo, "disable Bayesian optimization of the loss weights");
  cmd.add_flag("--no-adaptive", no_adaptive, "disable residual-adaptive dataset updates");
  cmd.add_flag("--paper-scale", paper_scale, "100000 epochs, dataset update every 10000");
  cmd.add_flag("--comparison", comparison, "learning rate 1e-4, 2000 interior points, error every 1000 epochs");
  cmd.add_option("--out", cfg.out_dir, "output directory");
}

void finish_config(RunConfig& cfg, const std::string& activation, const std::string& init, bool no_bo,
                   bool no_adaptive, bool paper_scale, bool comparison, const CLI::App& cmd) {
  cfg.activation = parse_activation(activation);
  if (init == "normal") {
    cfg.initial_sampling = InitialSampling::Normal;
  } else if (init != "lhs") {
    throw ConfigError("unknown initial sampling '" + init + "'");
  }
  if (no_bo) cfg.bayes_opt = false;
  if (no_adaptive) cfg.adaptive = false;
  if (paper_scale) {
    if (cmd.count("--epochs") == 0) cfg.max_epochs = 100000;
    if (cmd.count("--update-period") == 0) cfg.dataset_update_period = 10000;
  }
  if (comparison) {
    if (cmd.count("--lr") == 0) cfg.learning_rate = 1e-4;
    if (cmd.count("--nf") == 0) cfg.n_interior = 2000;
    if (cmd.count("--error-every") == 0) cfg.error_every = 1000;
  }
}

void print_metrics(const char* label, const MetricReport& m) {
  std::printf("%s: MSE %.6e  MAE %.6e  REL2 %.6e  MAXERR %.6e  relMAXERR %.6e\n", label, m.mse, m.mae, m.rel2,
              m.max_error, m.relative_max_error);
}

std::vector<std::pair<std::string, std::filesystem::path>> parse_baselines(const std::vector<std::string>& specs) {
  std::vector<std::pair<std::string, std::filesystem::path>> out;
  for (const std::string& s : specs) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == s.size())
      throw ConfigError("baseline must be NAME=PATH, got '" + s + "'");
    out.emplace_back(s.substr(0, eq), s.substr(eq + 1));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  // Keep the large per-epoch temporaries on the heap instead of fresh mmaps.
  mallopt(M_MMAP_THRESHOLD, 256 << 20);
  mallopt(M_TRIM_THRESHOLD, 512 << 20);
  CLI::App app{"Obstacle-problem solver: deep Ritz training with adaptive sampling and BO loss weights"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string activation = "tanh";
  std::string init = "lhs";
  bool no_bo = false, no_adaptive = false, paper_scale = false, comparison = false;
  std::vector<std::string> baselines;

  CLI::App* train_cmd = app.add_subcommand("train", "train one network");
  add_training_options(*train_cmd, cfg, activation, init, no_bo, no_adaptive, paper_scale, comparison);
  train_cmd->add_option("--baseline", baselines, "NAME=PATH error history (epoch,error) to compare against");

  CLI::App* ablate_cmd = app.add_subcommand("ablate", "full method vs no dataset update vs no BO");
  add_training_options(*ablate_cmd, cfg, activation, init, no_bo, no_adaptive, paper_scale, comparison);
  std::vector<std::uint64_t> seeds;
  ablate_cmd->add_option("--seeds", seeds, "seeds (overrides --seed)")->delimiter(',');

  std::string problem_name;
  int nodes = 0;
  std::filesystem::path out_path;
  double omega = 0.0, tol = 0.0;
  long max_iter = 0;
  CLI::App* oracle_cmd = app.add_subcommand("oracle", "finite-difference PSOR reference solution");
  oracle_cmd->add_option("--problem", problem_name)->required();
  oracle_cmd->add_option("--nodes", nodes, "nodes per axis");
  oracle_cmd->add_option("--omega", omega);
  oracle_cmd->add_option("--tol", tol);
  oracle_cmd->add_option("--max-iter", max_iter);
  oracle_cmd->add_option("--out", out_path, "output directory");

  std::filesystem::path checkpoint;
  std::string reference = "auto";
  CLI::App* eval_cmd = app.add_subcommand("eval", "metrics of a checkpoint against a reference");
  eval_cmd->add_option("--checkpoint", checkpoint)->required();
  eval_cmd->add_option("--problem", problem_name)->required();
  eval_cmd->add_option("--reference", reference, "auto|exact|oracle");
  eval_cmd->add_option("--nodes", nodes, "grid nodes per axis");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train_cmd->parsed()) {
      finish_config(cfg, activation, init, no_bo, no_adaptive, paper_scale, comparison, *train_cmd);
      const auto base = parse_baselines(baselines);
      if (!base.empty() && cfg.error_every == 0) cfg.error_every = 1000;
      for (const std::string& w : resolve_problem(cfg.problem).warnings) std::cerr << "warning: " << w << '\n';
      const RunResult r = train(cfg);
      std::printf("epochs %ld%s, %.1f s\n", r.epochs_run, r.stopped_early ? " (loss threshold)" : "", r.seconds);
      std::printf("final weights %.6g %.6g %.6g, mean constraint violation %.3e\n", r.final_weights.w1,
                  r.final_weights.w2, r.final_weights.w3, r.final_constraint);
      print_metrics("vs oracle", *r.vs_oracle);
      if (r.vs_exact) print_metrics("vs exact ", *r.vs_exact);
      if (!base.empty()) {
        if (cfg.out_dir.empty()) throw ConfigError("--baseline needs --out");
        write_comparison(r.error_history, base, cfg.out_dir / "comparison.csv");
      }
    } else if (ablate_cmd->parsed()) {
      finish_config(cfg, activation, init, no_bo, no_adaptive, paper_scale, comparison, *ablate_cmd);
      if (seeds.empty()) seeds.push_back(cfg.seed);
      const AblationResult res = ablation(cfg, seeds);
      for (const AblationArm& arm : res.arms) {
        for (std::size_t i = 0; i < arm.seeds.size(); ++i) {
          if (!arm.errors[i].empty())
            std::fprintf(stderr, "%s seed %llu failed: %s\n", arm.name.c_str(),
                         static_cast<unsigned long long>(arm.seeds[i]), arm.errors[i].c_str());
        }
        if (arm.median) print_metrics(arm.name.c_str(), *arm.median);
      }
    } else if (oracle_cmd->parsed()) {
      const ProblemSpec problem = resolve_problem(problem_name);
      for (const std::string& w : problem.warnings) std::cerr << "warning: " << w << '\n';
      const int n = nodes > 0 ? nodes : default_oracle_nodes(problem.dim());
      PsorOptions opts = PsorOptions::defaults(problem.dim(), n);
      if (omega > 0.0) opts.omega = omega;
      if (tol > 0.0) opts.tol = tol;
      if (max_iter > 0) opts.max_iter = max_iter;
      const GridSolution sol = solve_obstacle_fd(problem, n, opts);
      std::printf("nodes %d^%d, %s after %ld sweeps, complementarity residual %.3e\n", n, problem.dim(),
                  sol.converged ? "converged" : "NOT converged", sol.iterations, sol.final_residual);
      if (problem.exact) {
        const MetricReport m =
            compute_metrics(evaluate_exact(problem, sol.node_points())->transpose(), sol.values);
        print_metrics("vs exact", m);
      }
      if (!out_path.empty()) {
        std::filesystem::create_directories(out_path);
        write_grid_csv(sol, out_path / "oracle.csv");
      }
    } else if (eval_cmd->parsed()) {
      ReferenceKind kind = ReferenceKind::Auto;
      if (reference == "exact") {
        kind = ReferenceKind::Exact;
      } else if (reference == "oracle") {
        kind = ReferenceKind::Oracle;
      } else if (reference != "auto") {
        throw ConfigError("unknown reference '" + reference + "'");
      }
      const MetricReport m = evaluate(load_checkpoint(checkpoint), resolve_problem(problem_name), kind, nodes);
      std::cout << to_json(m).dump(2) << '\n';
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
