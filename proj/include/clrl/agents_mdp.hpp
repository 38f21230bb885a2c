#pragma once

#include <cstddef>
#include <vector>

#include "clrl/mdp.hpp"
#include "clrl/rd.hpp"
#include "clrl/rng.hpp"

namespace clrl {

// Conjugate posterior over tabular MDPs: Dirichlet rows over next states and
// Beta posteriors over mean rewards (reward realizations are Bernoulli).
struct MdpPosterior {
  std::size_t n_states = 0;
  std::size_t n_actions = 0;
  int horizon = 0;
  std::vector<double> init_dist;
  Matrix dir_alpha;  // (S*A) x S Dirichlet concentrations
  Matrix reward_a;   // S x A Beta alpha
  Matrix reward_b;   // S x A Beta beta

  static MdpPosterior uniform(std::size_t n_states, std::size_t n_actions, int horizon,
                              std::vector<double> init_dist);
  void validate() const;
};

struct EpisodeStep {
  std::size_t state = 0;
  std::size_t action = 0;
  double reward = 0.0;
  std::size_t next_state = 0;
};

struct EpisodeTrajectory {
  std::vector<EpisodeStep> steps;
};

// Draws one MDP from the posterior.
TabularMDP sample_mdp(const MdpPosterior& post, Rng& rng);

// Conjugate update from one episode. Rewards must be exactly 0 or 1.
MdpPosterior update_mdp_posterior(const MdpPosterior& post, const EpisodeTrajectory& traj);

// Rolls out a policy in the true environment with Bernoulli reward
// realizations.
EpisodeTrajectory run_episode(const TabularMDP& env, const NonStationaryPolicy& policy, Rng& rng);

// Posterior sampling: solve one posterior draw and play its optimal policy.
NonStationaryPolicy psrl_episode_policy(const MdpPosterior& post, Rng& rng);

// A lossy compression of a set of sampled MDPs: source and output alphabets
// are both the sample set, distortion is the value-equivalence discrepancy.
struct MdpCompression {
  std::vector<TabularMDP> samples;
  Channel channel;           // Z x Z
  double rate_nats = 0.0;
  double distortion = 0.0;
  int iters = 0;
};

// Builds the value-equivalence distortion matrix between every pair of
// samples. When policies/values are empty, defaults are derived from the
// samples themselves: each sample's optimal first-step decision rule and its
// optimal step-0 value vector.
MdpCompression compress_mdp_samples(std::vector<TabularMDP> samples, double beta,
                                    const BaOptions& opts = {},
                                    std::vector<Matrix> policies = {},
                                    std::vector<std::vector<double>> values = {});

// Value-of-information episode policy: draw Z posterior samples, compress
// them at inverse temperature beta, sample a source index and its compressed
// stand-in, and play the stand-in's optimal policy.
struct VsrlEpisode {
  NonStationaryPolicy policy;
  double rate_nats = 0.0;
  double expected_distortion = 0.0;
  std::size_t source_index = 0;
  std::size_t compressed_index = 0;
};

VsrlEpisode vsrl_episode_policy(const MdpPosterior& post, double beta, std::size_t z_samples,
                                Rng& rng, const BaOptions& opts = {});

}  // namespace clrl
