#pragma once

#include "drpinns/bayes_opt.hpp"
#include "drpinns/fd_oracle.hpp"
#include "drpinns/loss.hpp"
#include "drpinns/metrics.hpp"
#include "drpinns/network.hpp"
#include "drpinns/problems.hpp"
#include "drpinns/sampling.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace drpinns {

struct RunConfig {
  std::string problem = "ex1";  // ex1..ex4, ex4x or a JSON path

  int hidden_layers = 3;
  int units = 20;
  Activation activation = Activation::Tanh;

  double learning_rate = 1e-3;      // alpha_0, within [1e-4, 1e-2]
  double lr_decay = 0.9;            // alpha_t = alpha_0 * decay^(t / lr_decay_steps)
  long lr_decay_steps = 10000;

  long max_epochs = 20000;
  double loss_threshold = 1e-4;     // stop when |loss_t - loss_{t-1}| < this...
  long stop_patience = 100;         // ...on this many consecutive epochs
  long dataset_update_period = 2000;
  double update_loss_delta = 1e-3;  // also resample when |loss_t - loss_{t-1}| < this...
  long update_min_gap = 500;        // ...but not within this many epochs of the previous round

  int n_interior = 2000;
  int n_boundary = 400;
  InitialSampling initial_sampling = InitialSampling::LatinHypercube;

  LossWeights initial_weights{};    // 1e4 each

  bool bayes_opt = true;
  long bo_period = 1000;            // K
  long bo_probe_epochs = 200;
  int bo_candidates = 256;
  /// Weight-independent probe score: energy + penalty * (constraint + boundary).
  double bo_score_penalty = 1e4;

  bool adaptive = true;
  int resample_parents = 100;       // M
  int resample_children = 2;        // n
  double resample_radius = 0.0;     // r_0; <= 0 selects 0.1 x longest box edge

  std::uint64_t seed = 42;

  /// Grid nodes per axis for the reference oracle; 0 selects 1025 / 257 / 33 by dimension.
  int oracle_nodes = 0;
  /// Nodes per axis of solution_samples.csv; 0 selects 101 / 101 / 21.
  int sample_nodes = 0;
  /// Record the error against the reference every this many epochs (0 disables).
  long error_every = 0;

  /// Output directory; empty writes nothing.
  std::filesystem::path out_dir;

  /// Throws ConfigError on out-of-range values.
  void validate() const;
  nlohmann::json to_json() const;
};

struct LossRecord {
  long epoch = 0;
  LossBreakdown loss;
  LossWeights weights;
};

struct BoRecord {
  int cycle = 0;
  long epoch = 0;
  LossWeights proposed;
  double observed = 0.0;
  double incumbent = 0.0;
  double best_so_far = 0.0;
  bool adopted = false;
};

struct ErrorRecord {
  long epoch = 0;
  double mae = 0.0;
  double max_error = 0.0;
};

struct RunResult {
  Network params;
  std::vector<LossRecord> loss_history;
  std::vector<BoRecord> bo_history;
  std::vector<ErrorRecord> error_history;
  std::vector<std::filesystem::path> snapshots;
  CollocationSet final_set;
  LossWeights final_weights;
  std::optional<MetricReport> vs_oracle;
  std::optional<MetricReport> vs_exact;
  double final_constraint = 0.0;  // mean hinge violation on the final interior set
  long epochs_run = 0;
  bool stopped_early = false;
  double seconds = 0.0;
};

/// Precomputed reference shared by several runs on the same problem.
struct Reference {
  GridSolution oracle;
};

Reference build_reference(const ProblemSpec& problem, int oracle_nodes = 0);

int default_oracle_nodes(int dim);

/// Weight-independent score used to compare BO probes.
double bo_score(const LossBreakdown& loss, double penalty);

/// Runs the training loop for `config`. Non-finite losses write
/// checkpoint_diagnostic.json (when out_dir is set) and rethrow.
RunResult train(const RunConfig& config, const Reference* reference = nullptr);

enum class ReferenceKind { Auto, Exact, Oracle };

/// Network vs reference on the full grid of `nodes_per_axis` nodes (0 selects
/// the oracle default). Auto prefers the exact solution. Throws NoReference
/// when Exact is requested for a problem without one.
MetricReport evaluate(const Network& net, const ProblemSpec& problem, ReferenceKind kind = ReferenceKind::Auto,
                      int nodes_per_axis = 0);

struct AblationArm {
  std::string name;  // "DRPINNS", "DRPINNS without dataset update", "DRPINNS without Bayesian optimization"
  std::vector<std::uint64_t> seeds;
  std::vector<std::optional<RunResult>> runs;  // nullopt when the arm failed for that seed
  std::vector<std::string> errors;
  std::optional<MetricReport> median;  // median over successful seeds, per metric
};

struct AblationResult {
  std::string problem;
  std::vector<AblationArm> arms;  // full, no dataset update, no BO
};

/// Three arms per seed sharing the initial dataset, differing only in the
/// disabled mechanism. Writes table1.csv and ablation_runs.csv when out_dir is set.
AblationResult ablation(const RunConfig& base, const std::vector<std::uint64_t>& seeds);

/// Table 1 layout: problem, method, MSE, MAE, REL2, relative MAXERROR.
void write_table1(const AblationResult& result, const std::filesystem::path& path);

/// Reads "epoch,error" histories of other solvers and writes them next to the
/// run's own error history (outer join on epoch).
void write_comparison(const std::vector<ErrorRecord>& own,
                      const std::vector<std::pair<std::string, std::filesystem::path>>& baselines,
                      const std::filesystem::path& path);

}  // namespace drpinns
