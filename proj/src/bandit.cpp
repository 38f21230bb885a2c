#include "clrl/bandit.hpp"

#include <cmath>
#include <string>

#include "clrl/errors.hpp"

namespace clrl {

namespace {

void check_means(const std::vector<double>& means, bool unit_interval) {
  if (means.empty()) throw ValidationError("BanditEnv: needs at least one arm");
  for (double m : means) {
    if (!std::isfinite(m)) throw ValidationError("BanditEnv: non-finite mean");
    if (unit_interval && (m < 0.0 || m > 1.0)) {
      throw ValidationError("BanditEnv: Bernoulli means must lie in [0,1]");
    }
  }
}

}  // namespace

BanditEnv BanditEnv::bernoulli(std::vector<double> means) {
  check_means(means, true);
  return {RewardKind::kBernoulli, std::move(means)};
}

BanditEnv BanditEnv::gaussian(std::vector<double> means) {
  check_means(means, false);
  return {RewardKind::kGaussian, std::move(means)};
}

BeliefState::BeliefState(RewardKind kind, std::vector<double> a, std::vector<double> b)
    : kind_(kind), a_(std::move(a)), b_(std::move(b)) {
  if (a_.empty() || a_.size() != b_.size()) {
    throw ValidationError("BeliefState: parameter vectors must be nonempty and equal length");
  }
  for (std::size_t i = 0; i < a_.size(); ++i) {
    if (!std::isfinite(a_[i]) || !std::isfinite(b_[i])) {
      throw ValidationError("BeliefState: non-finite parameter");
    }
    if (kind_ == RewardKind::kBernoulli && (a_[i] <= 0.0 || b_[i] <= 0.0)) {
      throw ValidationError("BeliefState: Beta parameters must be positive");
    }
    if (kind_ == RewardKind::kGaussian && b_[i] <= 0.0) {
      throw ValidationError("BeliefState: Gaussian variance must be positive");
    }
  }
}

BeliefState BeliefState::beta_uniform(std::size_t arms) {
  return BeliefState(RewardKind::kBernoulli, std::vector<double>(arms, 1.0),
                     std::vector<double>(arms, 1.0));
}

BeliefState BeliefState::gaussian_standard(std::size_t arms) {
  return BeliefState(RewardKind::kGaussian, std::vector<double>(arms, 0.0),
                     std::vector<double>(arms, 1.0));
}

BeliefState BeliefState::beta(std::vector<double> alpha, std::vector<double> beta) {
  return BeliefState(RewardKind::kBernoulli, std::move(alpha), std::move(beta));
}

BeliefState BeliefState::gaussian(std::vector<double> mean, std::vector<double> var) {
  return BeliefState(RewardKind::kGaussian, std::move(mean), std::move(var));
}

double BeliefState::posterior_mean(std::size_t arm) const {
  if (arm >= arms()) throw ValidationError("BeliefState: arm out of range");
  if (kind_ == RewardKind::kBernoulli) return a_[arm] / (a_[arm] + b_[arm]);
  return a_[arm];
}

double sample_reward(const BanditEnv& env, std::size_t action, Rng& rng) {
  if (action >= env.arms()) throw ValidationError("sample_reward: action out of range");
  if (env.kind == RewardKind::kBernoulli) {
    std::bernoulli_distribution d(env.means[action]);
    return d(rng) ? 1.0 : 0.0;
  }
  std::normal_distribution<double> d(env.means[action], 1.0);
  return d(rng);
}

BeliefState update_belief(const BeliefState& belief, const StepRecord& obs) {
  if (obs.action >= belief.arms()) throw ValidationError("update_belief: action out of range");
  std::vector<double> a(belief.arms()), b(belief.arms());
  for (std::size_t i = 0; i < belief.arms(); ++i) {
    if (belief.kind() == RewardKind::kBernoulli) {
      a[i] = belief.alpha(i);
      b[i] = belief.beta_param(i);
    } else {
      a[i] = belief.mean(i);
      b[i] = belief.var(i);
    }
  }
  if (belief.kind() == RewardKind::kBernoulli) {
    if (obs.reward != 0.0 && obs.reward != 1.0) {
      throw ValidationError("update_belief: Bernoulli reward must be 0 or 1");
    }
    a[obs.action] += obs.reward;
    b[obs.action] += 1.0 - obs.reward;
    return BeliefState::beta(std::move(a), std::move(b));
  }
  if (!std::isfinite(obs.reward)) {
    throw ValidationError("update_belief: non-finite reward");
  }
  // Unit observation noise: precision adds one per observation.
  double prec = 1.0 / b[obs.action];
  double mu = (a[obs.action] * prec + obs.reward) / (prec + 1.0);
  a[obs.action] = mu;
  b[obs.action] = 1.0 / (prec + 1.0);
  return BeliefState::gaussian(std::move(a), std::move(b));
}

BanditEnv sample_env(const BeliefState& belief, Rng& rng) {
  std::vector<double> means(belief.arms());
  if (belief.kind() == RewardKind::kBernoulli) {
    for (std::size_t i = 0; i < belief.arms(); ++i) {
      std::gamma_distribution<double> ga(belief.alpha(i), 1.0);
      std::gamma_distribution<double> gb(belief.beta_param(i), 1.0);
      double x = ga(rng), y = gb(rng);
      means[i] = x / (x + y);
    }
    return BanditEnv::bernoulli(std::move(means));
  }
  for (std::size_t i = 0; i < belief.arms(); ++i) {
    std::normal_distribution<double> d(belief.mean(i), std::sqrt(belief.var(i)));
    means[i] = d(rng);
  }
  return BanditEnv::gaussian(std::move(means));
}

}  // namespace clrl
