#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spibb/envs.hpp"
#include "spibb/qlearn.hpp"
#include "spibb/spi.hpp"

namespace spibb {

/// Full sweep description: behavior training, dataset grid, improvement
/// grid and evaluation. Defaults are desk scale; paper_scale() switches to
/// the full published-style grid (hours of compute).
struct ExperimentConfig {
  std::string env_name = "tiger";
  int k = 2;
  std::vector<int> k_prime_grid;  // empty -> {k}
  std::vector<long long> n_wedge_grid = {5, 7, 10, 15, 20, 30, 50, 70, 100};
  std::vector<int> trajectory_grid = {10, 100, 1000};
  int repetitions = 50;
  int eval_episodes = 2000;
  int reference_episodes = 10000;
  int max_steps = 300;
  double delta = 0.05;
  double v_max = 0.0;   // <= 0: reward_max / (1 - gamma)
  double tau = 0.0;     // <= 0: environment default
  bool include_basic_rl = true;
  int jobs = 0;         // worker threads; 0 = hardware concurrency
  std::uint64_t seed = 1;
  std::string out_dir;  // empty: no files written

  QLearnConfig qlearn;  // k and seed are filled in by the driver

  void apply_paper_scale();
  void validate() const;
};

/// One (repetition, size, algorithm, k', N) cell of the sweep.
struct CellResult {
  int rep = 0;
  int size = 0;
  std::string algorithm;  // "spibb" or "basic_rl"
  int k_prime = 0;
  long long n_wedge = 0;
  double rho = 0.0;
  double rho_norm = 0.0;
  double zeta = 0.0;
  double epsilon = 0.0;
  double rho_improved_mle = 0.0;
  double rho_behavior_mle = 0.0;
  int iterations = 0;
  bool ok = true;
  std::string error;
};

struct AggregateRow {
  std::string algorithm;
  int k_prime = 0;
  long long n_wedge = 0;
  int size = 0;
  double mean_rho = 0.0;
  double cvar10 = 0.0;
  double cvar1 = 0.0;
  double mean_rho_norm = 0.0;
  double mean_zeta = 0.0;
  int n = 0;
};

struct ExperimentReport {
  ExperimentConfig config;
  double gamma = 0.0;
  double rho_behavior = 0.0;
  double rho_behavior_stderr = 0.0;
  double rho_max = 0.0;
  double rho_max_stderr = 0.0;
  std::vector<CellResult> cells;          // long form, fixed order
  std::vector<AggregateRow> aggregates;   // one row per grid cell
};

/// Runs the sweep. Cells are independent jobs executed on a bounded worker
/// pool; every random stream is derived from the master seed, so the report
/// (and any files written) are identical across runs and thread counts.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

/// Deterministic text renderings of the report.
std::string results_long_csv(const ExperimentReport& report);
std::string summary_csv(const ExperimentReport& report);
std::string plot_csv(const ExperimentReport& report, const std::string& algorithm,
                     int k_prime, long long n_wedge);
std::string run_manifest_json(const ExperimentReport& report);

/// Writes results_long.csv, summary.csv, per-panel plot CSVs and
/// run_manifest.json into report.config.out_dir.
void write_report_files(const ExperimentReport& report);

}  // namespace spibb
