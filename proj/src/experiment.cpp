#include "spibb/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"
#include "spibb/dataset.hpp"
#include "spibb/eval.hpp"
#include "spibb/oracle.hpp"

namespace spibb {

namespace {

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string sanitize(std::string text) {
  for (char& c : text)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  return text;
}

}  // namespace

void ExperimentConfig::apply_paper_scale() {
  trajectory_grid = {1, 2, 5, 10, 20, 50, 100, 200, 500, 1000, 2000, 5000, 10000};
  repetitions = 500;
  eval_episodes = 10000;
}

void ExperimentConfig::validate() const {
  if (k < 1) throw std::invalid_argument("experiment: k must be >= 1");
  if (n_wedge_grid.empty()) throw std::invalid_argument("experiment: empty n_wedge grid");
  if (trajectory_grid.empty()) throw std::invalid_argument("experiment: empty trajectory grid");
  if (repetitions < 1) throw std::invalid_argument("experiment: repetitions must be >= 1");
  if (eval_episodes < 1 || reference_episodes < 1)
    throw std::invalid_argument("experiment: evaluation episode counts must be >= 1");
  if (max_steps < 1) throw std::invalid_argument("experiment: max_steps must be >= 1");
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("experiment: delta must be in (0, 1)");
  for (int kp : k_prime_grid)
    if (kp < k) throw std::invalid_argument("experiment: k' smaller than the behavior window");
  for (long long n : n_wedge_grid)
    if (n < 0) throw std::invalid_argument("experiment: negative n_wedge");
  for (int t : trajectory_grid)
    if (t < 1) throw std::invalid_argument("experiment: trajectory sizes must be >= 1");
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const EnvSpec env = make_env(cfg.env_name);
  const Pomdp& pomdp = env.pomdp;
  const double gamma = pomdp.discount;
  const double tau = cfg.tau > 0.0 ? cfg.tau : default_softmax_tau(env.name);
  const std::vector<int> k_primes =
      cfg.k_prime_grid.empty() ? std::vector<int>{cfg.k} : cfg.k_prime_grid;

  ExperimentReport report;
  report.config = cfg;
  report.config.tau = tau;
  report.config.k_prime_grid = k_primes;
  report.gamma = gamma;

  // behavior policy
  QLearnConfig qcfg = cfg.qlearn;
  qcfg.k = cfg.k;
  qcfg.max_steps = cfg.max_steps;
  qcfg.seed = derive_seed(cfg.seed, {fnv1a("behavior")});
  const QTable qtable = train_q_learning(env, qcfg);
  const Fsc structure_k =
      make_k_window_fsc(cfg.k, pomdp.num_obs(), pomdp.num_actions(), pomdp.obs_names);
  const Fsc behavior = softmax_policy(structure_k, qtable, tau);

  std::vector<Fsc> structures(k_primes.size());
  std::vector<Fsc> lifted(k_primes.size());
  for (std::size_t i = 0; i < k_primes.size(); ++i) {
    structures[i] = make_k_window_fsc(k_primes[i], pomdp.num_obs(),
                                      pomdp.num_actions(), pomdp.obs_names);
    lifted[i] = lift_window_fsc(behavior, k_primes[i]);
  }

  // references
  const RolloutStats behavior_stats =
      rollout_performance(env, behavior, cfg.reference_episodes, cfg.max_steps, gamma,
                          derive_seed(cfg.seed, {fnv1a("behavior-eval")}));
  report.rho_behavior = behavior_stats.mean;
  report.rho_behavior_stderr = behavior_stats.stderr_mean;
  const int k_max = *std::max_element(k_primes.begin(), k_primes.end()) + 1;
  const ReferenceOptimum ref =
      reference_optimum(env, k_max, cfg.reference_episodes, cfg.max_steps,
                        derive_seed(cfg.seed, {fnv1a("reference")}));
  report.rho_max = ref.stats.mean;
  report.rho_max_stderr = ref.stats.stderr_mean;

  // one job per (repetition, dataset size); each job fills a contiguous
  // block of result rows so the output order is independent of scheduling
  const int n_sizes = static_cast<int>(cfg.trajectory_grid.size());
  const int rows_per_kp =
      static_cast<int>(cfg.n_wedge_grid.size()) + (cfg.include_basic_rl ? 1 : 0);
  const int rows_per_job = static_cast<int>(k_primes.size()) * rows_per_kp;
  const int n_jobs = cfg.repetitions * n_sizes;
  report.cells.assign(static_cast<std::size_t>(n_jobs) * rows_per_job, CellResult{});

  auto run_job = [&](int job) {
    const int rep = job / n_sizes;
    const int size_idx = job % n_sizes;
    const int size = cfg.trajectory_grid[size_idx];
    CellResult* rows = report.cells.data() + static_cast<std::size_t>(job) * rows_per_job;

    const std::uint64_t collect_seed =
        derive_seed(cfg.seed, {fnv1a("collect"), static_cast<std::uint64_t>(rep),
                               static_cast<std::uint64_t>(size)});
    Dataset dataset;
    bool collected = true;
    std::string collect_error;
    try {
      dataset = collect_dataset(env, behavior, size, cfg.max_steps, collect_seed);
    } catch (const std::exception& e) {
      collected = false;
      collect_error = e.what();
    }

    int slot = 0;
    for (std::size_t ki = 0; ki < k_primes.size(); ++ki) {
      const int k_prime = k_primes[ki];
      CountTable counts;
      TabularMdp mle;
      bool prepared = collected;
      std::string prepare_error = collect_error;
      if (collected) {
        try {
          const Dataset relabeled = k_prime == cfg.k
                                        ? dataset
                                        : relabel_dataset(dataset, structures[ki]);
          counts = count(relabeled, structures[ki]);
          mle = estimate_mle_mdp(counts, structures[ki], gamma, pomdp.reward_min,
                                 pomdp.reward_max);
        } catch (const std::exception& e) {
          prepared = false;
          prepare_error = e.what();
        }
      }

      auto solve_cell = [&](const std::string& algorithm, long long n_wedge) {
        CellResult& cell = rows[slot++];
        cell.rep = rep;
        cell.size = size;
        cell.algorithm = algorithm;
        cell.k_prime = k_prime;
        cell.n_wedge = n_wedge;
        if (!prepared) {
          cell.ok = false;
          cell.error = sanitize(prepare_error);
          return;
        }
        try {
          SpibbConfig scfg;
          scfg.n_wedge = n_wedge;
          scfg.delta = cfg.delta;
          scfg.k_prime = k_prime;
          scfg.v_max = cfg.v_max;
          const SpibbResult result =
              spibb_policy(mle, lifted[ki], bootstrapped_set(counts, n_wedge), scfg);
          const std::uint64_t eval_seed = derive_seed(
              cfg.seed, {fnv1a("eval"), static_cast<std::uint64_t>(rep),
                         static_cast<std::uint64_t>(size),
                         static_cast<std::uint64_t>(k_prime),
                         static_cast<std::uint64_t>(n_wedge)});
          const RolloutStats stats =
              rollout_performance(env, result.improved, cfg.eval_episodes,
                                  cfg.max_steps, gamma, eval_seed);
          cell.rho = stats.mean;
          try {
            cell.rho_norm =
                normalized_improvement(stats.mean, report.rho_behavior, report.rho_max);
          } catch (const std::domain_error&) {
            cell.rho_norm = std::numeric_limits<double>::quiet_NaN();
          }
          cell.zeta = result.report.zeta;
          cell.epsilon = result.report.epsilon;
          cell.rho_improved_mle = result.report.rho_improved_mle;
          cell.rho_behavior_mle = result.report.rho_behavior_mle;
          cell.iterations = result.iterations;
        } catch (const std::exception& e) {
          cell.ok = false;
          cell.error = sanitize(e.what());
        }
      };

      for (long long n_wedge : cfg.n_wedge_grid) solve_cell("spibb", n_wedge);
      if (cfg.include_basic_rl) solve_cell("basic_rl", 0);
    }
  };

  int workers = cfg.jobs > 0 ? cfg.jobs
                             : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp(workers, 1, std::max(1, n_jobs));
  if (workers == 1) {
    for (int job = 0; job < n_jobs; ++job) run_job(job);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (int job = next.fetch_add(1); job < n_jobs; job = next.fetch_add(1))
          run_job(job);
      });
    for (auto& t : pool) t.join();
  }

  // aggregation is a pure fold over the long-form rows
  auto aggregate_cell = [&](const std::string& algorithm, int k_prime,
                            long long n_wedge, int size) {
    std::vector<double> rhos, norms, zetas;
    for (const CellResult& cell : report.cells) {
      if (!cell.ok || cell.algorithm != algorithm || cell.k_prime != k_prime ||
          cell.n_wedge != n_wedge || cell.size != size)
        continue;
      rhos.push_back(cell.rho);
      norms.push_back(cell.rho_norm);
      zetas.push_back(cell.zeta);
    }
    AggregateRow row;
    row.algorithm = algorithm;
    row.k_prime = k_prime;
    row.n_wedge = n_wedge;
    row.size = size;
    row.n = static_cast<int>(rhos.size());
    if (!rhos.empty()) {
      double sum = 0.0, nsum = 0.0, zsum = 0.0;
      for (double v : rhos) sum += v;
      for (double v : norms) nsum += v;
      for (double v : zetas) zsum += v;
      row.mean_rho = sum / rhos.size();
      row.mean_rho_norm = nsum / norms.size();
      row.mean_zeta = zsum / zetas.size();
      row.cvar10 = cvar(rhos, 10.0);
      row.cvar1 = cvar(rhos, 1.0);
    }
    report.aggregates.push_back(row);
  };
  for (int k_prime : k_primes) {
    for (long long n_wedge : cfg.n_wedge_grid)
      for (int size : cfg.trajectory_grid) aggregate_cell("spibb", k_prime, n_wedge, size);
    if (cfg.include_basic_rl)
      for (int size : cfg.trajectory_grid) aggregate_cell("basic_rl", k_prime, 0, size);
  }

  if (!cfg.out_dir.empty()) write_report_files(report);
  return report;
}

std::string results_long_csv(const ExperimentReport& report) {
  std::string out =
      "env,k,rep,size,algorithm,k_prime,n_wedge,rho,rho_norm,zeta,epsilon,"
      "rho_improved_mle,rho_behavior_mle,iterations,error\n";
  for (const CellResult& c : report.cells) {
    out += report.config.env_name + "," + std::to_string(report.config.k) + "," +
           std::to_string(c.rep) + "," + std::to_string(c.size) + "," + c.algorithm +
           "," + std::to_string(c.k_prime) + "," + std::to_string(c.n_wedge) + ",";
    if (c.ok) {
      out += fmt(c.rho) + "," + fmt(c.rho_norm) + "," + fmt(c.zeta) + "," +
             fmt(c.epsilon) + "," + fmt(c.rho_improved_mle) + "," +
             fmt(c.rho_behavior_mle) + "," + std::to_string(c.iterations) + ",";
    } else {
      out += ",,,,,,,"
             + c.error;
    }
    out += "\n";
  }
  return out;
}

std::string summary_csv(const ExperimentReport& report) {
  std::string out =
      "env,k,algorithm,k_prime,n_wedge,size,mean_rho,cvar10,cvar1,mean_rho_norm,"
      "mean_zeta,n,rho_behavior,rho_max\n";
  for (const AggregateRow& r : report.aggregates) {
    out += report.config.env_name + "," + std::to_string(report.config.k) + "," +
           r.algorithm + "," + std::to_string(r.k_prime) + "," +
           std::to_string(r.n_wedge) + "," + std::to_string(r.size) + "," +
           fmt(r.mean_rho) + "," + fmt(r.cvar10) + "," + fmt(r.cvar1) + "," +
           fmt(r.mean_rho_norm) + "," + fmt(r.mean_zeta) + "," + std::to_string(r.n) +
           "," + fmt(report.rho_behavior) + "," + fmt(report.rho_max) + "\n";
  }
  return out;
}

std::string plot_csv(const ExperimentReport& report, const std::string& algorithm,
                     int k_prime, long long n_wedge) {
  std::string out = "size,mean,cvar10,cvar1,behavior_rho\n";
  for (int size : report.config.trajectory_grid) {
    for (const AggregateRow& r : report.aggregates) {
      if (r.algorithm != algorithm || r.k_prime != k_prime || r.n_wedge != n_wedge ||
          r.size != size)
        continue;
      out += std::to_string(size) + "," + fmt(r.mean_rho) + "," + fmt(r.cvar10) + "," +
             fmt(r.cvar1) + "," + fmt(report.rho_behavior) + "\n";
    }
  }
  return out;
}

std::string run_manifest_json(const ExperimentReport& report) {
  const ExperimentConfig& cfg = report.config;
  nlohmann::json j;
  j["env"] = cfg.env_name;
  j["k"] = cfg.k;
  j["gamma"] = report.gamma;
  j["k_prime_grid"] = cfg.k_prime_grid;
  j["n_wedge_grid"] = cfg.n_wedge_grid;
  j["trajectory_grid"] = cfg.trajectory_grid;
  j["repetitions"] = cfg.repetitions;
  j["eval_episodes"] = cfg.eval_episodes;
  j["reference_episodes"] = cfg.reference_episodes;
  j["max_steps"] = cfg.max_steps;
  j["delta"] = cfg.delta;
  j["v_max"] = cfg.v_max;
  j["tau"] = cfg.tau;
  j["include_basic_rl"] = cfg.include_basic_rl;
  j["seed"] = cfg.seed;
  j["qlearn"] = {{"episodes", cfg.qlearn.episodes},
                 {"alpha0", cfg.qlearn.alpha0},
                 {"epsilon0", cfg.qlearn.epsilon0},
                 {"lambda", cfg.qlearn.lambda}};
  j["rho_behavior"] = report.rho_behavior;
  j["rho_behavior_stderr"] = report.rho_behavior_stderr;
  j["rho_max"] = report.rho_max;
  j["rho_max_stderr"] = report.rho_max_stderr;
  return j.dump(2);
}

void write_report_files(const ExperimentReport& report) {
  namespace fs = std::filesystem;
  const fs::path dir(report.config.out_dir);
  fs::create_directories(dir);
  auto write = [&](const fs::path& name, const std::string& text) {
    std::ofstream out(dir / name);
    if (!out) throw std::runtime_error("cannot open " + (dir / name).string());
    out << text;
  };
  write("results_long.csv", results_long_csv(report));
  write("summary.csv", summary_csv(report));
  write("run_manifest.json", run_manifest_json(report) + "\n");
  for (int k_prime : report.config.k_prime_grid) {
    for (long long n_wedge : report.config.n_wedge_grid)
      write("plot_k" + std::to_string(report.config.k) + "_kp" + std::to_string(k_prime) +
                "_N" + std::to_string(n_wedge) + ".csv",
            plot_csv(report, "spibb", k_prime, n_wedge));
    if (report.config.include_basic_rl)
      write("plot_k" + std::to_string(report.config.k) + "_kp" + std::to_string(k_prime) +
                "_basic_rl.csv",
            plot_csv(report, "basic_rl", k_prime, 0));
  }
}

}  // namespace spibb
