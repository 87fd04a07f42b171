// Command-line front end: train behavior policies, collect datasets, compute
// improved policies with their safety bounds, evaluate controllers, and run
// full experiment sweeps.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "spibb/dataset.hpp"
#include "spibb/envs.hpp"
#include "spibb/eval.hpp"
#include "spibb/experiment.hpp"
#include "spibb/qlearn.hpp"
#include "spibb/spi.hpp"

namespace {

namespace fs = std::filesystem;
using namespace spibb;

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << text;
}

std::string behavior_id(const std::string& env, int k, std::uint64_t seed, double tau) {
  return env + "-k" + std::to_string(k) + "-seed" + std::to_string(seed) + "-tau" +
         std::to_string(tau);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Offline safe policy improvement for POMDPs with finite-state controllers"};
  app.require_subcommand(1);

  std::string env_name = "tiger";
  std::uint64_t seed = 12345;
  std::string out_dir = ".";
  app.add_option("--env", env_name,
                 "Environment: tiger, voicemail, cheesemaze or file:<pomdp.json>")
      ->capture_default_str();
  app.add_option("--seed", seed, "Master seed")->capture_default_str();
  app.add_option("--out", out_dir, "Output directory")->capture_default_str();

  // train-behavior
  auto* train = app.add_subcommand("train-behavior",
                                   "Q-learning over k-window history states, then "
                                   "softmax extraction of a behavior controller");
  int train_k = 2;
  QLearnConfig qcfg;
  double tau = 0.0;
  train->add_option("--k", train_k, "History window length")->capture_default_str();
  train->add_option("--episodes", qcfg.episodes)->capture_default_str();
  train->add_option("--alpha0", qcfg.alpha0)->capture_default_str();
  train->add_option("--epsilon0", qcfg.epsilon0)->capture_default_str();
  train->add_option("--lambda", qcfg.lambda)->capture_default_str();
  train->add_option("--max-steps", qcfg.max_steps)->capture_default_str();
  train->add_option("--tau", tau, "Softmax temperature (0 = environment default)")
      ->capture_default_str();

  // collect
  auto* collect = app.add_subcommand("collect", "Simulate episodes under a behavior controller");
  std::string behavior_path;
  int trajectories = 100;
  int max_steps = 300;
  collect->add_option("--behavior", behavior_path, "Behavior controller JSON")->required();
  collect->add_option("--trajectories", trajectories)->capture_default_str();
  collect->add_option("--max-steps", max_steps)->capture_default_str();

  // improve
  auto* improve = app.add_subcommand(
      "improve", "Estimate the finite-history MDP from a dataset and compute the "
                 "constrained improved policy with its safety bound");
  std::string dataset_path, improve_behavior_path;
  long long n_wedge = 5;
  int k_prime = 0;
  double delta = 0.05;
  double v_max = 0.0;
  bool basic_rl = false;
  improve->add_option("--dataset", dataset_path, "Dataset CSV (expects <name>.meta.json beside it)")
      ->required();
  improve->add_option("--behavior", improve_behavior_path, "Behavior controller JSON")->required();
  improve->add_option("--n-wedge", n_wedge, "Count threshold below which a pair is unknown")
      ->capture_default_str();
  improve->add_option("--k-prime", k_prime, "Window of the improved policy (0 = behavior window)")
      ->capture_default_str();
  improve->add_option("--delta", delta)->capture_default_str();
  improve->add_option("--v-max", v_max, "Performance bound (0 = reward_max/(1-gamma))")
      ->capture_default_str();
  improve->add_flag("--basic-rl", basic_rl, "Unconstrained solve (n_wedge forced to 0)");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Monte Carlo rollout of a controller");
  std::string policy_path;
  int eval_episodes = 2000;
  int eval_max_steps = 300;
  evaluate->add_option("--policy", policy_path, "Controller JSON")->required();
  evaluate->add_option("--episodes", eval_episodes)->capture_default_str();
  evaluate->add_option("--max-steps", eval_max_steps)->capture_default_str();

  // bound
  auto* bound = app.add_subcommand("bound", "Evaluate the safety-bound formulas from flags");
  std::string variant_name = "finite-history";
  long long b_states = 1;
  int b_actions = 1, b_obs = 1;
  long long b_n_wedge = 1;
  double b_delta = 0.05, b_v_max = 1.0, b_gamma = 0.95;
  double b_rho_improved = 0.0, b_rho_behavior = 0.0, b_zeta = 0.0;
  bound->add_option("--variant", variant_name, "finite-history or history")
      ->capture_default_str();
  bound->add_option("--state-count", b_states)->required();
  bound->add_option("--action-count", b_actions)->required();
  bound->add_option("--obs-count", b_obs)->required();
  bound->add_option("--n-wedge", b_n_wedge)->capture_default_str();
  bound->add_option("--delta", b_delta)->capture_default_str();
  bound->add_option("--v-max", b_v_max)->capture_default_str();
  bound->add_option("--gamma", b_gamma)->capture_default_str();
  bound->add_option("--rho-improved", b_rho_improved)->capture_default_str();
  bound->add_option("--rho-behavior", b_rho_behavior)->capture_default_str();
  bound->add_option("--zeta", b_zeta,
                    "When > 0, also report the sufficient per-pair sample count")
      ->capture_default_str();

  // experiment
  auto* experiment = app.add_subcommand("experiment", "Full sweep with CSV outputs");
  ExperimentConfig xcfg;
  bool paper_scale = false;
  std::string sizes_csv, n_wedge_csv, k_prime_csv;
  experiment->add_option("--k", xcfg.k)->capture_default_str();
  experiment->add_option("--sizes", sizes_csv, "Comma-separated trajectory counts");
  experiment->add_option("--n-wedges", n_wedge_csv, "Comma-separated thresholds");
  experiment->add_option("--k-primes", k_prime_csv, "Comma-separated improved windows");
  experiment->add_option("--reps", xcfg.repetitions)->capture_default_str();
  experiment->add_option("--eval-episodes", xcfg.eval_episodes)->capture_default_str();
  experiment->add_option("--reference-episodes", xcfg.reference_episodes)->capture_default_str();
  experiment->add_option("--max-steps", xcfg.max_steps)->capture_default_str();
  experiment->add_option("--delta", xcfg.delta)->capture_default_str();
  experiment->add_option("--v-max", xcfg.v_max)->capture_default_str();
  experiment->add_option("--tau", xcfg.tau)->capture_default_str();
  experiment->add_option("--jobs", xcfg.jobs, "Worker threads (0 = hardware)")->capture_default_str();
  experiment->add_flag("--paper-scale", paper_scale,
                       "Full-size grid: 500 repetitions, 10000 evaluation episodes");
  experiment->add_flag("!--basic-rl", xcfg.include_basic_rl, "Disable the unconstrained baseline");

  CLI11_PARSE(app, argc, argv);

  try {
    const fs::path out(out_dir);

    if (*train) {
      const EnvSpec env = make_env(env_name);
      qcfg.k = train_k;
      qcfg.seed = derive_seed(seed, {fnv1a("behavior")});
      const double use_tau = tau > 0.0 ? tau : default_softmax_tau(env.name);
      std::vector<TrainLogEntry> log;
      const QTable table = train_q_learning(env, qcfg, &log);
      const Fsc structure = make_k_window_fsc(train_k, env.pomdp.num_obs(),
                                              env.pomdp.num_actions(), env.pomdp.obs_names);
      const Fsc behavior = softmax_policy(structure, table, use_tau);
      write_file(out / "behavior_fsc.json", fsc_to_json(behavior) + "\n");
      write_file(out / "qtable.json", qtable_to_json(table) + "\n");
      save_train_log(log, (out / "train_log.csv").string());
      std::cout << "behavior controller written to " << (out / "behavior_fsc.json").string()
                << " (id " << behavior_id(env.name, train_k, seed, use_tau) << ")\n";
    }

    if (*collect) {
      const EnvSpec env = make_env(env_name);
      const Fsc behavior = load_fsc(behavior_path);
      Dataset data = collect_dataset(env, behavior, trajectories, max_steps,
                                     derive_seed(seed, {fnv1a("collect")}));
      data.meta.behavior_id = behavior_path;
      save_dataset(data, (out / "dataset.csv").string(),
                   (out / "dataset.meta.json").string());
      std::cout << "collected " << trajectories << " trajectories ("
                << data.total_steps() << " steps) into " << (out / "dataset.csv").string()
                << "\n";
    }

    if (*improve) {
      const EnvSpec env = make_env(env_name);
      const Fsc behavior = load_fsc(improve_behavior_path);
      fs::path meta = dataset_path;
      meta.replace_extension(".meta.json");
      const Dataset data = load_dataset(dataset_path, meta.string());
      const int kp = k_prime > 0 ? k_prime : behavior.window;
      const Fsc structure = make_k_window_fsc(kp, env.pomdp.num_obs(),
                                              env.pomdp.num_actions(), env.pomdp.obs_names);
      const Dataset relabeled = kp == behavior.window ? data : relabel_dataset(data, structure);
      const CountTable counts = count(relabeled, structure);
      const TabularMdp mle = estimate_mle_mdp(counts, structure, env.pomdp.discount,
                                              env.pomdp.reward_min, env.pomdp.reward_max);
      const Fsc lifted = lift_window_fsc(behavior, kp);
      SpibbConfig scfg;
      scfg.n_wedge = basic_rl ? 0 : n_wedge;
      scfg.delta = delta;
      scfg.k_prime = kp;
      scfg.v_max = v_max;
      const SpibbResult result =
          spibb_policy(mle, lifted, bootstrapped_set(counts, scfg.n_wedge), scfg);
      write_file(out / "improved_fsc.json", fsc_to_json(result.improved) + "\n");
      write_file(out / "safety_report.json", safety_report_to_json(result.report) + "\n");
      std::cout << "improved policy written; zeta = "
                << (result.report.finite ? std::to_string(result.report.zeta) : "inf")
                << ", rho(improved, MLE) = " << result.report.rho_improved_mle
                << ", rho(behavior, MLE) = " << result.report.rho_behavior_mle << "\n";
    }

    if (*evaluate) {
      const EnvSpec env = make_env(env_name);
      const Fsc policy = load_fsc(policy_path);
      const RolloutStats stats =
          rollout_performance(env, policy, eval_episodes, eval_max_steps,
                              env.pomdp.discount, derive_seed(seed, {fnv1a("evaluate")}));
      nlohmann::json j;
      j["mean"] = stats.mean;
      j["stderr"] = stats.stderr_mean;
      j["episodes"] = stats.episodes;
      std::cout << j.dump(2) << "\n";
    }

    if (*bound) {
      const BoundVariant variant = variant_name == "history"
                                       ? BoundVariant::kHistoryMdp
                                       : BoundVariant::kFiniteHistoryMdp;
      const SafetyReport report =
          zeta_bound(variant, b_states, b_actions, b_obs, b_n_wedge, b_delta, b_v_max,
                     b_gamma, b_rho_improved, b_rho_behavior);
      nlohmann::json j = nlohmann::json::parse(safety_report_to_json(report));
      if (b_zeta > 0.0)
        j["sufficiency_count"] =
            sufficiency_count(b_zeta, b_delta, b_states, b_actions, b_v_max, b_gamma, b_obs);
      std::cout << j.dump(2) << "\n";
    }

    if (*experiment) {
      auto parse_list = [](const std::string& text, auto push) {
        std::stringstream ss(text);
        std::string item;
        while (std::getline(ss, item, ',')) push(item);
      };
      if (!sizes_csv.empty()) {
        xcfg.trajectory_grid.clear();
        parse_list(sizes_csv, [&](const std::string& s) {
          xcfg.trajectory_grid.push_back(std::stoi(s));
        });
      }
      if (!n_wedge_csv.empty()) {
        xcfg.n_wedge_grid.clear();
        parse_list(n_wedge_csv, [&](const std::string& s) {
          xcfg.n_wedge_grid.push_back(std::stoll(s));
        });
      }
      if (!k_prime_csv.empty()) {
        xcfg.k_prime_grid.clear();
        parse_list(k_prime_csv, [&](const std::string& s) {
          xcfg.k_prime_grid.push_back(std::stoi(s));
        });
      }
      if (paper_scale) xcfg.apply_paper_scale();
      xcfg.env_name = env_name;
      xcfg.seed = seed;
      xcfg.out_dir = (out / "experiment").string();
      const ExperimentReport report = run_experiment(xcfg);
      std::cout << "experiment finished: " << report.cells.size() << " cells, results in "
                << xcfg.out_dir << "\n"
                << "rho(behavior) = " << report.rho_behavior
                << ", rho(reference optimum) = " << report.rho_max << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
