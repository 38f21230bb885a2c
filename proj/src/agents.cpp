#include "clrl/agents.hpp"

#include <algorithm>
#include <cmath>

#include "clrl/errors.hpp"

namespace clrl {

namespace {

std::vector<double> sample_mean_vector(const BeliefState& belief, Rng& rng) {
  return sample_env(belief, rng).means;
}

std::size_t argmax_uniform_ties(const std::vector<double>& v, Rng& rng) {
  double best = v[0];
  for (double x : v) best = std::max(best, x);
  std::size_t ties = 0;
  for (double x : v) {
    if (x == best) ++ties;
  }
  std::uniform_int_distribution<std::size_t> pick(0, ties - 1);
  std::size_t target = pick(rng);
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] == best && target-- == 0) return i;
  }
  return v.size() - 1;  // unreachable
}

}  // namespace

std::size_t ts_select(const BeliefState& belief, Rng& rng) {
  std::vector<double> means = sample_mean_vector(belief, rng);
  return argmax_uniform_ties(means, rng);
}

std::size_t sts_select(const BeliefState& belief, double epsilon, Rng& rng) {
  if (epsilon < 0.0) throw ValidationError("sts_select: epsilon must be nonnegative");
  std::vector<double> means = sample_mean_vector(belief, rng);
  double best = *std::max_element(means.begin(), means.end());
  for (std::size_t i = 0; i < means.size(); ++i) {
    if (best - means[i] <= epsilon) return i;
  }
  return means.size() - 1;  // unreachable: the argmax itself has gap 0
}

DistortionMatrix regret_distortion(const std::vector<std::vector<double>>& sampled_means,
                                   DistortionKind kind) {
  if (sampled_means.empty() || sampled_means[0].empty()) {
    throw ValidationError("regret_distortion: need at least one sample and one arm");
  }
  const std::size_t zn = sampled_means.size(), an = sampled_means[0].size();
  Matrix d(zn, an);
  for (std::size_t z = 0; z < zn; ++z) {
    if (sampled_means[z].size() != an) {
      throw ValidationError("regret_distortion: ragged sample matrix");
    }
    double best = *std::max_element(sampled_means[z].begin(), sampled_means[z].end());
    for (std::size_t a = 0; a < an; ++a) {
      double gap = best - sampled_means[z][a];
      d.at(z, a) = kind == DistortionKind::kLinearRegret ? gap : gap * gap;
    }
  }
  return DistortionMatrix(std::move(d));
}

namespace {

struct BlastsChannel {
  Channel channel;
  double rate;
  double distortion;
  int iters;
};

BlastsChannel blasts_channel(const BeliefState& belief, const AgentConfig& cfg, Rng& rng) {
  if (cfg.z_samples == 0) throw ValidationError("blasts: z_samples must be positive");
  if (cfg.lambda < 0.0) throw ValidationError("blasts: lambda must be nonnegative");
  std::vector<std::vector<double>> samples;
  samples.reserve(cfg.z_samples);
  for (std::size_t z = 0; z < cfg.z_samples; ++z) {
    samples.push_back(sample_mean_vector(belief, rng));
  }
  DistortionMatrix d = regret_distortion(samples, cfg.distortion);
  EmpiricalSource src = EmpiricalSource::uniform(cfg.z_samples);
  if (cfg.lambda == 0.0) {
    Channel ch = min_distortion_channel(d);
    return {ch, channel_rate(src, ch), channel_distortion(src, ch, d), 0};
  }
  BaOptions opts;
  opts.max_iters = cfg.ba_iters;
  opts.tol = cfg.ba_tol;
  BaResult r = blahut_arimoto(src, d, 1.0 / cfg.lambda, opts);
  return {std::move(r.channel), r.rate_nats, r.distortion, r.iters};
}

std::size_t sample_channel_action(const Channel& ch, Rng& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, ch.sources() - 1);
  std::size_t z = pick(rng);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double x = u(rng), acc = 0.0;
  for (std::size_t k = 0; k < ch.outputs(); ++k) {
    acc += ch.at(z, k);
    if (x <= acc) return k;
  }
  return ch.outputs() - 1;
}

}  // namespace

BlastsStep blasts_step(const BeliefState& belief, const AgentConfig& cfg, Rng& rng) {
  BlastsChannel bc = blasts_channel(belief, cfg, rng);
  BlastsStep step{0,
                  bc.rate,
                  bc.distortion,
                  marginal_output_distribution(EmpiricalSource::uniform(bc.channel.sources()),
                                               bc.channel),
                  bc.iters};
  step.action = sample_channel_action(bc.channel, rng);
  return step;
}

std::size_t blasts_select(const BeliefState& belief, const AgentConfig& cfg, Rng& rng) {
  return blasts_step(belief, cfg, rng).action;
}

DiscreteDist blasts_marginal(const BeliefState& belief, const AgentConfig& cfg, Rng& rng) {
  BlastsChannel bc = blasts_channel(belief, cfg, rng);
  return marginal_output_distribution(EmpiricalSource::uniform(bc.channel.sources()), bc.channel);
}

StepDiagnostics run_bandit_step(BanditAgentState& state, const BanditEnv& env, long t, Rng& rng,
                                StepRecord* record) {
  if (env.arms() != state.belief.arms()) {
    throw ValidationError("run_bandit_step: environment and belief disagree on arm count");
  }
  StepDiagnostics diag;
  std::size_t action = 0;
  switch (state.cfg.kind) {
    case BanditAgentKind::kThompson:
      action = ts_select(state.belief, rng);
      break;
    case BanditAgentKind::kSatisficing:
      action = sts_select(state.belief, state.cfg.epsilon, rng);
      break;
    case BanditAgentKind::kBlasts: {
      BlastsStep step = blasts_step(state.belief, state.cfg, rng);
      action = step.action;
      diag.rate_nats = step.rate_nats;
      break;
    }
  }
  double reward = sample_reward(env, action, rng);
  StepRecord rec{t, action, reward};
  state.belief = update_belief(state.belief, rec);
  double best = *std::max_element(env.means.begin(), env.means.end());
  diag.expected_regret = best - env.means[action];
  if (record) *record = rec;
  return diag;
}

}  // namespace clrl
