#include "drpinns/runner.hpp"

#include "drpinns/adam.hpp"
#include "drpinns/errors.hpp"
#include "drpinns/network_io.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace drpinns {

namespace fs = std::filesystem;

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

enum Stream : std::uint64_t { kInit = 1, kCollocation = 2, kResample = 100, kPropose = 100000 };

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  return out;
}

// Full tensor grid with n nodes per axis, last axis fastest.
PointSet grid_points(const Box& box, int n) {
  GridSolution g;
  g.box = box;
  g.nodes_per_axis = n;
  g.spacing = box.width() / static_cast<double>(n - 1);
  Eigen::Index count = 1;
  for (int k = 0; k < box.dim(); ++k) count *= n;
  g.values = Eigen::VectorXd::Zero(count);
  return g.node_points();
}

int default_sample_nodes(int dim) { return dim == 3 ? 21 : 101; }

void write_loss_history(const std::vector<LossRecord>& history, const fs::path& path) {
  std::ofstream out = open_out(path);
  out << "epoch,energy,constraint,boundary,total,w1,w2,w3\n";
  for (const LossRecord& r : history) {
    out << r.epoch << ',' << fmt(r.loss.energy) << ',' << fmt(r.loss.constraint) << ',' << fmt(r.loss.boundary)
        << ',' << fmt(r.loss.total) << ',' << fmt(r.weights.w1) << ',' << fmt(r.weights.w2) << ','
        << fmt(r.weights.w3) << '\n';
  }
}

void write_bo_history(const std::vector<BoRecord>& history, const fs::path& path) {
  std::ofstream out = open_out(path);
  out << "cycle,epoch,w1,w2,w3,observed,incumbent,best_so_far,adopted\n";
  for (const BoRecord& r : history) {
    out << r.cycle << ',' << r.epoch << ',' << fmt(r.proposed.w1) << ',' << fmt(r.proposed.w2) << ','
        << fmt(r.proposed.w3) << ',' << fmt(r.observed) << ',' << fmt(r.incumbent) << ',' << fmt(r.best_so_far)
        << ',' << (r.adopted ? 1 : 0) << '\n';
  }
}

void write_error_history(const std::vector<ErrorRecord>& history, const fs::path& path) {
  std::ofstream out = open_out(path);
  out << "epoch,mae,max_error\n";
  for (const ErrorRecord& r : history) out << r.epoch << ',' << fmt(r.mae) << ',' << fmt(r.max_error) << '\n';
}

nlohmann::json weights_json(const LossWeights& w) { return {w.w1, w.w2, w.w3}; }

nlohmann::json loss_json(const LossBreakdown& l) {
  return {{"energy", l.energy}, {"constraint", l.constraint}, {"boundary", l.boundary}, {"total", l.total}};
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

const MetricReport& headline(const RunResult& r) { return r.vs_exact ? *r.vs_exact : *r.vs_oracle; }

// Reference values at the oracle nodes: exact when available, else the oracle.
struct ErrorProbe {
  PointSet points;
  Eigen::VectorXd values;
};

}  // namespace

void RunConfig::validate() const {
  if (hidden_layers < 1 || units < 1) throw InvalidArchitecture("need at least one hidden layer with one unit");
  if (!(learning_rate >= 1e-4 && learning_rate <= 1e-2))
    throw ConfigError("learning rate must lie in [1e-4, 1e-2]");
  if (!(lr_decay > 0.0 && lr_decay <= 1.0)) throw ConfigError("lr decay must lie in (0, 1]");
  if (lr_decay_steps < 1) throw ConfigError("lr decay steps must be positive");
  if (max_epochs < 0) throw ConfigError("max epochs must be non-negative");
  if (!(loss_threshold >= 0.0) || !(update_loss_delta >= 0.0)) throw ConfigError("thresholds must be non-negative");
  if (stop_patience < 1) throw ConfigError("stop patience must be positive");
  if (dataset_update_period < 1 || update_min_gap < 0) throw ConfigError("invalid dataset update schedule");
  if (n_interior < 1 || n_boundary < 1) throw ConfigError("need interior and boundary collocation points");
  if (bo_period < 1 || bo_probe_epochs < 1 || bo_candidates < 1) throw ConfigError("invalid BO schedule");
  if (!(bo_score_penalty > 0.0)) throw ConfigError("BO score penalty must be positive");
  if (resample_parents < 1 || resample_children < 1) throw ConfigError("invalid resampling counts");
  if (oracle_nodes != 0 && oracle_nodes < 3) throw ConfigError("oracle needs at least 3 nodes per axis");
  if (sample_nodes != 0 && sample_nodes < 2) throw ConfigError("sample grid needs at least 2 nodes per axis");
  if (error_every < 0) throw ConfigError("error interval must be non-negative");
  initial_weights.validate();
}

nlohmann::json RunConfig::to_json() const {
  return {{"problem", problem},
          {"hidden_layers", hidden_layers},
          {"units", units},
          {"activation", std::string(to_string(activation))},
          {"learning_rate", learning_rate},
          {"lr_decay", lr_decay},
          {"lr_decay_steps", lr_decay_steps},
          {"max_epochs", max_epochs},
          {"loss_threshold", loss_threshold},
          {"stop_patience", stop_patience},
          {"dataset_update_period", dataset_update_period},
          {"update_loss_delta", update_loss_delta},
          {"update_min_gap", update_min_gap},
          {"n_interior", n_interior},
          {"n_boundary", n_boundary},
          {"initial_sampling", initial_sampling == InitialSampling::Normal ? "normal" : "lhs"},
          {"initial_weights", weights_json(initial_weights)},
          {"bayes_opt", bayes_opt},
          {"bo_period", bo_period},
          {"bo_probe_epochs", bo_probe_epochs},
          {"bo_candidates", bo_candidates},
          {"bo_score_penalty", bo_score_penalty},
          {"adaptive", adaptive},
          {"resample_parents", resample_parents},
          {"resample_children", resample_children},
          {"resample_radius", resample_radius},
          {"seed", seed},
          {"oracle_nodes", oracle_nodes},
          {"sample_nodes", sample_nodes},
          {"error_every", error_every}};
}

int default_oracle_nodes(int dim) {
  switch (dim) {
    case 1: return 1025;
    case 2: return 257;
    default: return 33;
  }
}

Reference build_reference(const ProblemSpec& problem, int oracle_nodes) {
  const int n = oracle_nodes > 0 ? oracle_nodes : default_oracle_nodes(problem.dim());
  return Reference{solve_obstacle_fd(problem, n)};
}

double bo_score(const LossBreakdown& loss, double penalty) {
  return loss.energy + penalty * (loss.constraint + loss.boundary);
}

RunResult train(const RunConfig& config, const Reference* reference) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  const ProblemSpec problem = resolve_problem(config.problem);
  const Box& box = problem.box;
  const bool write = !config.out_dir.empty();
  if (write) fs::create_directories(config.out_dir);

  std::optional<Reference> own_reference;
  if (reference == nullptr) {
    own_reference = build_reference(problem, config.oracle_nodes);
    reference = &*own_reference;
  }
  const GridSolution& oracle = reference->oracle;
  if (oracle.dim() != problem.dim()) throw InputDimensionError("reference grid dimension does not match the problem");

  RunResult result;
  result.params = init_params(mlp_layout(problem.dim(), config.hidden_layers, config.units), config.activation,
                              mix_seed(config.seed, kInit));
  Network& net = result.params;
  CollocationSet set = initial_collocation(box, config.n_interior, config.n_boundary,
                                           mix_seed(config.seed, kCollocation), config.initial_sampling);
  LossData data = LossData::build(problem, set);
  LossWeights weights = config.initial_weights;

  ResampleConfig resample_cfg = ResampleConfig::defaults_for(box);
  resample_cfg.parent_count = config.resample_parents;
  resample_cfg.children_per_parent = config.resample_children;
  if (config.resample_radius > 0.0) resample_cfg.base_radius = config.resample_radius;

  auto snapshot = [&]() {
    if (!write) return;
    const fs::path path = config.out_dir / ("dataset_round_" + std::to_string(set.round) + ".csv");
    write_collocation_csv(set, path);
    result.snapshots.push_back(path);
  };
  snapshot();

  ErrorProbe probe_ref{oracle.node_points(), oracle.values};
  if (problem.exact) probe_ref.values = evaluate_exact(problem, probe_ref.points)->transpose();
  auto record_error = [&](long epoch) {
    const Eigen::VectorXd pred = forward_batch<double>(net, probe_ref.points).transpose();
    const Eigen::ArrayXd err = (pred - probe_ref.values).array().abs();
    result.error_history.push_back({epoch, err.mean(), err.maxCoeff()});
  };

  AdamState<double> adam = AdamState<double>::zeros(net.parameter_count(), config.learning_rate);
  BoState bo;
  int cycle = 0;
  long last_update = 0;
  double previous_total = 0.0;
  long calm_epochs = 0;

  // Trains copies of the network and optimizer for the probe length, then
  // scores the result independently of the weights used to train it.
  auto run_probe = [&](const LossWeights& w) {
    Network probe_net = net;
    AdamState<double> probe_adam = adam;
    for (long s = 0; s < config.bo_probe_epochs; ++s) {
      const LossAndGradient lg = loss_and_gradient(probe_net, data, w);
      adam_step(probe_adam, probe_net, lg.gradient);
    }
    const double score = bo_score(evaluate_loss(probe_net, data, w), config.bo_score_penalty);
    if (!std::isfinite(score)) throw NonFiniteLoss("bo_score");
    return score;
  };

  try {
    if (config.error_every > 0) record_error(0);
    for (long epoch = 1; epoch <= config.max_epochs; ++epoch) {
      adam.alpha = config.learning_rate *
                   std::pow(config.lr_decay, static_cast<double>(epoch - 1) / static_cast<double>(config.lr_decay_steps));
      const LossAndGradient lg = loss_and_gradient(net, data, weights);
      result.loss_history.push_back({epoch, lg.breakdown, weights});
      adam_step(adam, net, lg.gradient);
      result.epochs_run = epoch;
      if (config.error_every > 0 && epoch % config.error_every == 0) record_error(epoch);

      const double delta = epoch > 1 ? std::abs(lg.breakdown.total - previous_total) : INFINITY;
      previous_total = lg.breakdown.total;
      calm_epochs = delta < config.loss_threshold ? calm_epochs + 1 : 0;
      if (calm_epochs >= config.stop_patience) {
        result.stopped_early = true;
        break;
      }

      if (config.bayes_opt && epoch % config.bo_period == 0) {
        ++cycle;
        const double incumbent = run_probe(weights);
        if (std::none_of(bo.observations.begin(), bo.observations.end(),
                         [&](const Observation& o) { return o.weights == weights; }))
          bo = bo_update(bo, weights, incumbent);
        const LossWeights raw =
            propose_weights(bo, config.bo_candidates, mix_seed(config.seed, kPropose + static_cast<std::uint64_t>(cycle)));
        // BO picks the direction; the incumbent's total magnitude is kept.
        NormalizedWeights scaled = normalize_weights(raw);
        scaled.magnitude = weights.sum();
        const LossWeights proposed = scaled.weights();
        const double observed = run_probe(proposed);
        bo = bo_update(bo, raw, observed);
        double best = observed;
        for (const Observation& o : bo.observations) best = std::min(best, o.loss);
        const bool adopt = observed < incumbent;
        result.bo_history.push_back({cycle, epoch, proposed, observed, incumbent, best, adopt});
        if (adopt) weights = proposed;
      }

      if (config.adaptive) {
        const bool periodic = epoch % config.dataset_update_period == 0;
        const bool stalled = delta < config.update_loss_delta && epoch - last_update >= config.update_min_gap;
        if (periodic || stalled) {
          const Eigen::VectorXd residuals = interior_residuals(net, data, weights);
          set = resample(set, residuals, resample_cfg, box,
                         mix_seed(config.seed, kResample + static_cast<std::uint64_t>(set.round)));
          data = LossData::build(problem, set);
          last_update = epoch;
          snapshot();
        }
      }
    }
  } catch (const NumericalError&) {
    if (write) {
      save_checkpoint(net, config.out_dir / "checkpoint_diagnostic.json");
      write_loss_history(result.loss_history, config.out_dir / "loss_history.csv");
    }
    throw;
  }

  result.final_set = set;
  result.final_weights = weights;
  result.final_constraint = evaluate_loss(net, data, weights).constraint;

  const PointSet nodes = oracle.node_points();
  const Eigen::VectorXd predicted = forward_batch<double>(net, nodes).transpose();
  result.vs_oracle = compute_metrics(oracle.values, predicted);
  if (problem.exact) result.vs_exact = compute_metrics(evaluate_exact(problem, nodes)->transpose(), predicted);
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  if (write) {
    write_loss_history(result.loss_history, config.out_dir / "loss_history.csv");
    write_bo_history(result.bo_history, config.out_dir / "bo_history.csv");
    if (config.error_every > 0) write_error_history(result.error_history, config.out_dir / "error_history.csv");
    save_checkpoint(net, config.out_dir / "checkpoint.json");

    const int sn = config.sample_nodes > 0 ? config.sample_nodes : default_sample_nodes(problem.dim());
    const PointSet samples = grid_points(box, sn);
    const Eigen::RowVectorXd u = forward_batch<double>(net, samples);
    const Eigen::RowVectorXd u_ref = interpolate_batch(oracle, samples);
    const auto u_exact = evaluate_exact(problem, samples);
    std::ofstream out = open_out(config.out_dir / "solution_samples.csv");
    for (int k = 0; k < problem.dim(); ++k) out << 'x' << k << ',';
    out << "u,u_oracle" << (u_exact ? ",u_exact" : "") << '\n';
    for (Eigen::Index i = 0; i < samples.cols(); ++i) {
      for (int k = 0; k < problem.dim(); ++k) out << fmt(samples(k, i)) << ',';
      out << fmt(u[i]) << ',' << fmt(u_ref[i]);
      if (u_exact) out << ',' << fmt((*u_exact)[i]);
      out << '\n';
    }

    nlohmann::json j;
    j["problem"] = problem.name;
    j["config"] = config.to_json();
    j["epochs_run"] = result.epochs_run;
    j["stopped_early"] = result.stopped_early;
    j["seconds"] = result.seconds;
    j["final_weights"] = weights_json(weights);
    j["final_loss"] = result.loss_history.empty() ? nlohmann::json(nullptr) : loss_json(result.loss_history.back().loss);
    j["final_constraint"] = result.final_constraint;
    j["dataset_rounds"] = set.round;
    j["oracle"] = {{"nodes_per_axis", oracle.nodes_per_axis},
                   {"converged", oracle.converged},
                   {"iterations", oracle.iterations},
                   {"residual", oracle.final_residual}};
    j["vs_oracle"] = to_json(*result.vs_oracle);
    j["vs_exact"] = result.vs_exact ? to_json(*result.vs_exact) : nlohmann::json(nullptr);
    j["warnings"] = problem.warnings;
    open_out(config.out_dir / "metrics.json") << j.dump(2) << '\n';
  }
  return result;
}

MetricReport evaluate(const Network& net, const ProblemSpec& problem, ReferenceKind kind, int nodes_per_axis) {
  if (net.input_dim() != problem.dim())
    throw InputDimensionError("checkpoint input dimension does not match the problem");
  const int n = nodes_per_axis > 0 ? nodes_per_axis : default_oracle_nodes(problem.dim());
  if (n < 3) throw ConfigError("evaluation grid needs at least 3 nodes per axis");
  if (kind == ReferenceKind::Exact && !problem.exact)
    throw NoReference("problem '" + problem.name + "' has no exact solution");

  if (kind == ReferenceKind::Oracle || (kind == ReferenceKind::Auto && !problem.exact)) {
    const GridSolution oracle = solve_obstacle_fd(problem, n);
    const Eigen::VectorXd pred = forward_batch<double>(net, oracle.node_points()).transpose();
    return compute_metrics(oracle.values, pred);
  }
  const PointSet nodes = grid_points(problem.box, n);
  const Eigen::VectorXd pred = forward_batch<double>(net, nodes).transpose();
  return compute_metrics(evaluate_exact(problem, nodes)->transpose(), pred);
}

AblationResult ablation(const RunConfig& base, const std::vector<std::uint64_t>& seeds) {
  base.validate();
  if (seeds.empty()) throw ConfigError("ablation needs at least one seed");
  const ProblemSpec problem = resolve_problem(base.problem);
  const Reference reference = build_reference(problem, base.oracle_nodes);

  AblationResult result;
  result.problem = problem.name;
  struct ArmSpec {
    std::string name;
    std::string dir;
    bool adaptive;
    bool bayes_opt;
  };
  const std::vector<ArmSpec> specs = {{"DRPINNS", "full", true, true},
                                      {"DRPINNS without dataset update", "no_dataset_update", false, true},
                                      {"DRPINNS without Bayesian optimization", "no_bo", true, false}};
  for (const ArmSpec& spec : specs) {
    AblationArm arm;
    arm.name = spec.name;
    arm.seeds = seeds;
    std::vector<MetricReport> ok;
    for (std::uint64_t seed : seeds) {
      RunConfig cfg = base;
      cfg.seed = seed;
      cfg.adaptive = spec.adaptive;
      cfg.bayes_opt = spec.bayes_opt;
      if (!base.out_dir.empty()) cfg.out_dir = base.out_dir / spec.dir / ("seed_" + std::to_string(seed));
      try {
        arm.runs.emplace_back(train(cfg, &reference));
        arm.errors.emplace_back();
        ok.push_back(headline(*arm.runs.back()));
      } catch (const NumericalError& e) {
        arm.runs.emplace_back(std::nullopt);
        arm.errors.emplace_back(e.what());
      }
    }
    if (!ok.empty()) {
      auto pick = [&](double MetricReport::*field) {
        std::vector<double> v;
        for (const MetricReport& m : ok) v.push_back(m.*field);
        return median(v);
      };
      MetricReport med;
      med.mse = pick(&MetricReport::mse);
      med.mae = pick(&MetricReport::mae);
      med.rel2 = pick(&MetricReport::rel2);
      med.max_error = pick(&MetricReport::max_error);
      med.relative_max_error = pick(&MetricReport::relative_max_error);
      med.reference_max = ok.front().reference_max;
      med.n_points = ok.front().n_points;
      med.relative_defined = ok.front().relative_defined;
      arm.median = med;
    }
    result.arms.push_back(std::move(arm));
  }

  if (!base.out_dir.empty()) {
    write_table1(result, base.out_dir / "table1.csv");
    std::ofstream out = open_out(base.out_dir / "ablation_runs.csv");
    out << "problem,method,seed,status,MSE,MAE,REL2,relative_MAXERROR,epochs,seconds\n";
    for (const AblationArm& arm : result.arms) {
      for (std::size_t i = 0; i < arm.seeds.size(); ++i) {
        out << result.problem << ",\"" << arm.name << "\"," << arm.seeds[i] << ',';
        if (!arm.runs[i]) {
          out << "failed,,,,,,\n";
          continue;
        }
        const MetricReport& m = headline(*arm.runs[i]);
        out << "ok," << fmt(m.mse) << ',' << fmt(m.mae) << ',' << fmt(m.rel2) << ',' << fmt(m.relative_max_error)
            << ',' << arm.runs[i]->epochs_run << ',' << fmt(arm.runs[i]->seconds) << '\n';
      }
    }
  }
  return result;
}

void write_table1(const AblationResult& result, const fs::path& path) {
  std::ofstream out = open_out(path);
  out << "problem,method,MSE,MAE,REL2,relative_MAXERROR\n";
  for (const AblationArm& arm : result.arms) {
    out << result.problem << ",\"" << arm.name << "\",";
    if (!arm.median) {
      out << ",,,\n";
      continue;
    }
    const MetricReport& m = *arm.median;
    out << fmt(m.mse) << ',' << fmt(m.mae) << ',' << fmt(m.rel2) << ',' << fmt(m.relative_max_error) << '\n';
  }
}

void write_comparison(const std::vector<ErrorRecord>& own,
                      const std::vector<std::pair<std::string, fs::path>>& baselines, const fs::path& path) {
  std::map<long, std::vector<std::string>> rows;
  const std::size_t columns = baselines.size() + 1;
  for (const ErrorRecord& r : own) {
    auto& row = rows[r.epoch];
    row.resize(columns);
    row[0] = fmt(r.mae);
  }
  for (std::size_t b = 0; b < baselines.size(); ++b) {
    std::ifstream in(baselines[b].second);
    if (!in) throw ConfigError("cannot read baseline " + baselines[b].second.string());
    std::string line;
    std::getline(in, line);  // header
    int line_no = 1;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      std::istringstream ss(line);
      std::string epoch_s, err_s;
      if (!std::getline(ss, epoch_s, ',') || !std::getline(ss, err_s, ','))
        throw ParseError(baselines[b].second.string() + ":" + std::to_string(line_no) + ": expected epoch,error");
      try {
        auto& row = rows[std::stol(epoch_s)];
        row.resize(columns);
        row[b + 1] = fmt(std::stod(err_s));
      } catch (const std::logic_error&) {
        throw ParseError(baselines[b].second.string() + ":" + std::to_string(line_no) + ": malformed number");
      }
    }
  }
  std::ofstream out = open_out(path);
  out << "epoch,drpinns";
  for (const auto& b : baselines) out << ',' << b.first;
  out << '\n';
  for (const auto& [epoch, row] : rows) {
    out << epoch;
    for (const std::string& cell : row) out << ',' << cell;
    out << '\n';
  }
}

}  // namespace drpinns
