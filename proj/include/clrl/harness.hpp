#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "clrl/agents.hpp"
#include "clrl/agents_mdp.hpp"
#include "clrl/bandit.hpp"

namespace clrl {

enum class ExperimentKind {
  kBanditRegret,   // cumulative regret curves
  kBanditRate,     // per-step information rate curves (regret also recorded)
  kRdCurve,        // trade-off curve of compressed targets vs satisficing targets
  kMarginalSweep,  // action marginal as a function of the information price
  kMdpRegret,      // episodic regret for posterior-sampling agents
};

struct MdpAgentSpec {
  bool compress = false;  // false: plain posterior sampling
  std::string label = "psrl";
  double beta = 100.0;
  std::size_t z_samples = 24;
  int ba_iters = 200;
  double ba_tol = 1e-9;
};

struct EnvSpec {
  enum class Type { kBernoulli, kGaussian, kRandomMdp, kFixedMdp };
  Type type = Type::kBernoulli;
  std::size_t arms = 0;
  std::vector<double> fixed_means;  // debugging hook: pins the same env for every seed
  std::size_t n_states = 0;
  std::size_t n_actions = 0;
  int mdp_horizon = 0;
  std::optional<TabularMDP> fixed_mdp;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::kBanditRegret;
  EnvSpec env;
  std::vector<std::uint64_t> seeds;
  long horizon = 0;    // bandit steps
  long episodes = 0;   // mdp episodes
  int entropy_samples = 1000;
  std::vector<AgentConfig> agents;
  std::vector<MdpAgentSpec> mdp_agents;
  // rd-curve:
  std::vector<double> betas;
  std::vector<double> epsilons;
  std::size_t z_samples = 1000;
  DistortionKind distortion = DistortionKind::kSquaredRegret;
  int ba_iters = 200;
  double ba_tol = 1e-9;
  // marginal-sweep:
  std::vector<double> lambdas;
  std::optional<BeliefState> belief;
  long ts_samples = 100000;
  std::string out_dir;  // optional output directory; CLI --out takes precedence
  nlohmann::json raw;   // config document after overrides, echoed into the manifest
};

// Parses and validates a config document. Throws ValidationError whose
// message names the offending field.
ExperimentConfig parse_config(const nlohmann::json& j);

struct ExperimentResult {
  std::vector<std::string> files_written;
};

// Runs the experiment and writes its CSV artifacts plus manifest.json into
// out_dir. Reruns with identical inputs produce byte-identical outputs.
ExperimentResult run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                                const std::vector<std::string>& override_echo = {});

// Entropy (nats) of the posterior-optimal-arm distribution, estimated from
// n posterior samples with argmax ties split evenly.
double estimate_optimal_action_entropy(const BeliefState& belief, long n_samples, Rng& rng);

// Entropy (nats) of the satisficing target's distribution under the current
// posterior (lowest-indexed arm within epsilon of each sample's best).
double estimate_satisficing_entropy(const BeliefState& belief, double epsilon, long n_samples,
                                    Rng& rng);

// One-step information ratio estimate: squared expected regret of the agent's
// action against the posterior-sampled target, divided by the information the
// (action, reward) pair carries about that target. Undefined (nullopt ratio)
// when the information term is below 1e-12 nats. Gaussian rewards are
// discretized into 16 bins for the information term.
struct InfoRatioEstimate {
  std::optional<double> ratio;
  double regret_sq = 0.0;
  double information_nats = 0.0;
  long n_samples = 0;
};

InfoRatioEstimate estimate_information_ratio(const BeliefState& belief, const AgentConfig& agent,
                                             long n_samples, Rng& rng);

// Sample mean and standard error (sample sd / sqrt(n); 0 when n == 1).
struct MeanStderr {
  double mean = 0.0;
  double stderr_ = 0.0;
};
MeanStderr mean_stderr(const std::vector<double>& xs);

// Pointwise mean and standard error across per-seed series. All series must
// share the same length.
struct AggregateSeries {
  std::vector<double> mean;
  std::vector<double> stderr_;
  std::size_t n_seeds = 0;
};
AggregateSeries aggregate_seeds(const std::vector<std::vector<double>>& per_seed);

// Deterministic float formatting for CSV output.
std::string csv_double(double v);

}  // namespace clrl
