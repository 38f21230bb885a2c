#pragma once

#include <cstddef>
#include <vector>

#include "clrl/rng.hpp"

namespace clrl {

enum class RewardKind { kBernoulli, kGaussian };

// A finite-armed environment: fixed true mean rewards. Bernoulli arms emit
// {0,1}; Gaussian arms emit unit-variance normal rewards.
struct BanditEnv {
  RewardKind kind = RewardKind::kBernoulli;
  std::vector<double> means;

  static BanditEnv bernoulli(std::vector<double> means);
  static BanditEnv gaussian(std::vector<double> means);
  std::size_t arms() const { return means.size(); }
};

// Conjugate posterior over arm means: per-arm Beta(alpha, beta) for Bernoulli
// rewards, or per-arm Normal(mu, var) for unit-variance Gaussian rewards.
class BeliefState {
 public:
  // Uninformative priors: Beta(1,1) and Normal(0,1).
  static BeliefState beta_uniform(std::size_t arms);
  static BeliefState gaussian_standard(std::size_t arms);
  static BeliefState beta(std::vector<double> alpha, std::vector<double> beta);
  static BeliefState gaussian(std::vector<double> mean, std::vector<double> var);

  RewardKind kind() const { return kind_; }
  std::size_t arms() const { return a_.size(); }

  // Beta parameters (Bernoulli kind only).
  double alpha(std::size_t arm) const { return a_[arm]; }
  double beta_param(std::size_t arm) const { return b_[arm]; }
  // Gaussian parameters (Gaussian kind only).
  double mean(std::size_t arm) const { return a_[arm]; }
  double var(std::size_t arm) const { return b_[arm]; }

  // Posterior mean of the arm's reward mean.
  double posterior_mean(std::size_t arm) const;

 private:
  BeliefState(RewardKind kind, std::vector<double> a, std::vector<double> b);
  RewardKind kind_;
  std::vector<double> a_, b_;
};

struct StepRecord {
  long t = 0;
  std::size_t action = 0;
  double reward = 0.0;
};

// Draws one reward from the environment.
double sample_reward(const BanditEnv& env, std::size_t action, Rng& rng);

// Conjugate update with one observation. Bernoulli rewards must be exactly
// 0 or 1.
BeliefState update_belief(const BeliefState& belief, const StepRecord& obs);

// Draws a full environment (mean vector) from the posterior.
BanditEnv sample_env(const BeliefState& belief, Rng& rng);

}  // namespace clrl
