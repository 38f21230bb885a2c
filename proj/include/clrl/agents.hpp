#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "clrl/bandit.hpp"
#include "clrl/rd.hpp"
#include "clrl/rng.hpp"

namespace clrl {

enum class BanditAgentKind { kThompson, kSatisficing, kBlasts };

// Per-sample regret penalty used to build distortion matrices: the gap to the
// sampled best arm, either raw or squared.
enum class DistortionKind { kLinearRegret, kSquaredRegret };

struct AgentConfig {
  BanditAgentKind kind = BanditAgentKind::kThompson;
  std::string label = "ts";
  double epsilon = 0.0;  // satisficing threshold on the sampled regret gap
  double lambda = 1.0;   // information price (reward units per nat); 0 means pure
                         // distortion minimization
  std::size_t z_samples = 1000;
  DistortionKind distortion = DistortionKind::kSquaredRegret;
  int ba_iters = 200;
  double ba_tol = 1e-9;
};

// Thompson sampling: draw one environment from the posterior and play its
// best arm, ties broken uniformly.
std::size_t ts_select(const BeliefState& belief, Rng& rng);

// Satisficing Thompson sampling: draw one environment, then play the
// lowest-indexed arm whose sampled regret gap is at most epsilon.
std::size_t sts_select(const BeliefState& belief, double epsilon, Rng& rng);

// Z x arms distortion matrix from sampled mean vectors: row z holds the gap
// (or squared gap) between that sample's best mean and each arm's mean.
DistortionMatrix regret_distortion(const std::vector<std::vector<double>>& sampled_means,
                                   DistortionKind kind);

// One compression step: Z posterior samples form the source, the channel is
// the converged trade-off solution at beta = 1/lambda, and the action is
// drawn by sampling a source index uniformly and then sampling that row.
struct BlastsStep {
  std::size_t action = 0;
  double rate_nats = 0.0;
  double expected_distortion = 0.0;
  DiscreteDist marginal;
  int iters = 0;
};

BlastsStep blasts_step(const BeliefState& belief, const AgentConfig& cfg, Rng& rng);

std::size_t blasts_select(const BeliefState& belief, const AgentConfig& cfg, Rng& rng);

// The exact action marginal of the converged channel (no action sampling);
// used by marginal sweeps.
DiscreteDist blasts_marginal(const BeliefState& belief, const AgentConfig& cfg, Rng& rng);

struct StepDiagnostics {
  double expected_regret = 0.0;          // true-environment gap of the played arm
  std::optional<double> rate_nats;       // per-step information rate, when available
};

struct BanditAgentState {
  AgentConfig cfg;
  BeliefState belief;
};

// One interaction step: select an action from the current posterior, draw a
// reward from the true environment, update the posterior. Diagnostics read
// the true environment but never feed back into the belief.
StepDiagnostics run_bandit_step(BanditAgentState& state, const BanditEnv& env, long t,
                                Rng& rng, StepRecord* record = nullptr);

}  // namespace clrl
