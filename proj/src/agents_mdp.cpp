#include "clrl/agents_mdp.hpp"

#include <cmath>
#include <string>

#include "clrl/errors.hpp"

namespace clrl {

MdpPosterior MdpPosterior::uniform(std::size_t n_states, std::size_t n_actions, int horizon,
                                   std::vector<double> init_dist) {
  MdpPosterior post;
  post.n_states = n_states;
  post.n_actions = n_actions;
  post.horizon = horizon;
  post.init_dist = std::move(init_dist);
  post.dir_alpha = Matrix(n_states * n_actions, n_states, 1.0);
  post.reward_a = Matrix(n_states, n_actions, 1.0);
  post.reward_b = Matrix(n_states, n_actions, 1.0);
  post.validate();
  return post;
}

void MdpPosterior::validate() const {
  if (n_states == 0 || n_actions == 0) throw ValidationError("MdpPosterior: empty space");
  if (horizon < 1) throw ValidationError("MdpPosterior: horizon must be at least 1");
  if (dir_alpha.rows() != n_states * n_actions || dir_alpha.cols() != n_states) {
    throw ValidationError("MdpPosterior: Dirichlet shape mismatch");
  }
  for (double v : dir_alpha.data()) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw ValidationError("MdpPosterior: Dirichlet concentrations must be positive");
    }
  }
  if (reward_a.rows() != n_states || reward_a.cols() != n_actions ||
      reward_b.rows() != n_states || reward_b.cols() != n_actions) {
    throw ValidationError("MdpPosterior: reward posterior shape mismatch");
  }
  for (std::size_t i = 0; i < reward_a.data().size(); ++i) {
    if (!(reward_a.data()[i] > 0.0) || !(reward_b.data()[i] > 0.0)) {
      throw ValidationError("MdpPosterior: Beta parameters must be positive");
    }
  }
  DiscreteDist check(init_dist);
  if (init_dist.size() != n_states) throw ValidationError("MdpPosterior: init_dist size mismatch");
}

TabularMDP sample_mdp(const MdpPosterior& post, Rng& rng) {
  TabularMDP mdp;
  mdp.n_states = post.n_states;
  mdp.n_actions = post.n_actions;
  mdp.horizon = post.horizon;
  mdp.init_dist = post.init_dist;
  mdp.reward = Matrix(post.n_states, post.n_actions);
  for (std::size_t s = 0; s < post.n_states; ++s) {
    for (std::size_t a = 0; a < post.n_actions; ++a) {
      std::gamma_distribution<double> ga(post.reward_a.at(s, a), 1.0);
      std::gamma_distribution<double> gb(post.reward_b.at(s, a), 1.0);
      double x = ga(rng), y = gb(rng);
      mdp.reward.at(s, a) = x / (x + y);
    }
  }
  mdp.transition = Matrix(post.n_states * post.n_actions, post.n_states);
  for (std::size_t r = 0; r < mdp.transition.rows(); ++r) {
    double sum = 0.0;
    for (std::size_t s2 = 0; s2 < post.n_states; ++s2) {
      std::gamma_distribution<double> g(post.dir_alpha.at(r, s2), 1.0);
      double v = g(rng);
      mdp.transition.at(r, s2) = v;
      sum += v;
    }
    for (std::size_t s2 = 0; s2 < post.n_states; ++s2) mdp.transition.at(r, s2) /= sum;
  }
  mdp.validate();
  return mdp;
}

MdpPosterior update_mdp_posterior(const MdpPosterior& post, const EpisodeTrajectory& traj) {
  MdpPosterior out = post;
  for (const EpisodeStep& step : traj.steps) {
    if (step.state >= post.n_states || step.action >= post.n_actions ||
        step.next_state >= post.n_states) {
      throw ValidationError("update_mdp_posterior: step indices out of range");
    }
    if (step.reward != 0.0 && step.reward != 1.0) {
      throw ValidationError("update_mdp_posterior: rewards must be 0 or 1");
    }
    out.dir_alpha.at(step.state * post.n_actions + step.action, step.next_state) += 1.0;
    out.reward_a.at(step.state, step.action) += step.reward;
    out.reward_b.at(step.state, step.action) += 1.0 - step.reward;
  }
  return out;
}

EpisodeTrajectory run_episode(const TabularMDP& env, const NonStationaryPolicy& policy, Rng& rng) {
  if (policy.steps.size() != static_cast<std::size_t>(env.horizon)) {
    throw ValidationError("run_episode: policy length must equal the horizon");
  }
  EpisodeTrajectory traj;
  std::discrete_distribution<std::size_t> init(env.init_dist.begin(), env.init_dist.end());
  std::size_t s = init(rng);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int h = 0; h < env.horizon; ++h) {
    const Matrix& pi = policy.steps[h];
    double x = u(rng), acc = 0.0;
    std::size_t a = env.n_actions - 1;
    for (std::size_t cand = 0; cand < env.n_actions; ++cand) {
      acc += pi.at(s, cand);
      if (x <= acc) {
        a = cand;
        break;
      }
    }
    double reward = u(rng) <= env.reward.at(s, a) ? 1.0 : 0.0;
    const double* row = env.transition.row(env.sa_row(s, a));
    double y = u(rng), acc2 = 0.0;
    std::size_t s2 = env.n_states - 1;
    for (std::size_t cand = 0; cand < env.n_states; ++cand) {
      acc2 += row[cand];
      if (y <= acc2) {
        s2 = cand;
        break;
      }
    }
    traj.steps.push_back({s, a, reward, s2});
    s = s2;
  }
  return traj;
}

NonStationaryPolicy psrl_episode_policy(const MdpPosterior& post, Rng& rng) {
  TabularMDP draw = sample_mdp(post, rng);
  return solve_optimal(draw).policy;
}

MdpCompression compress_mdp_samples(std::vector<TabularMDP> samples, double beta,
                                    const BaOptions& opts, std::vector<Matrix> policies,
                                    std::vector<std::vector<double>> values) {
  if (samples.empty()) throw ValidationError("compress_mdp_samples: empty sample set");
  const std::size_t zn = samples.size();
  if (policies.empty() || values.empty()) {
    policies.clear();
    values.clear();
    for (const TabularMDP& m : samples) {
      SolveResult sol = solve_optimal(m);
      policies.push_back(sol.policy.steps[0]);
      values.push_back(sol.values.v[0]);
    }
  }
  Matrix d(zn, zn, 0.0);
  for (std::size_t i = 0; i < zn; ++i) {
    for (std::size_t j = 0; j < zn; ++j) {
      if (i == j) continue;
      d.at(i, j) = ve_distortion(samples[i], samples[j], policies, values);
    }
  }
  DistortionMatrix dm(std::move(d));
  EmpiricalSource src = EmpiricalSource::uniform(zn);
  BaResult r = blahut_arimoto(src, dm, beta, opts);
  return {std::move(samples), std::move(r.channel), r.rate_nats, r.distortion, r.iters};
}

VsrlEpisode vsrl_episode_policy(const MdpPosterior& post, double beta, std::size_t z_samples,
                                Rng& rng, const BaOptions& opts) {
  if (z_samples < 2) throw ValidationError("vsrl_episode_policy: need at least two samples");
  std::vector<TabularMDP> samples;
  samples.reserve(z_samples);
  for (std::size_t z = 0; z < z_samples; ++z) samples.push_back(sample_mdp(post, rng));
  MdpCompression comp = compress_mdp_samples(std::move(samples), beta, opts);

  std::uniform_int_distribution<std::size_t> pick(0, z_samples - 1);
  std::size_t src_idx = pick(rng);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double x = u(rng), acc = 0.0;
  std::size_t out_idx = z_samples - 1;
  for (std::size_t k = 0; k < z_samples; ++k) {
    acc += comp.channel.at(src_idx, k);
    if (x <= acc) {
      out_idx = k;
      break;
    }
  }
  VsrlEpisode ep;
  ep.policy = solve_optimal(comp.samples[out_idx]).policy;
  ep.rate_nats = comp.rate_nats;
  ep.expected_distortion = comp.distortion;
  ep.source_index = src_idx;
  ep.compressed_index = out_idx;
  return ep;
}

}  // namespace clrl
