#include "clrl/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "clrl/errors.hpp"

namespace clrl {

void TabularMDP::validate() const {
  if (n_states == 0 || n_actions == 0) throw ValidationError("TabularMDP: empty state or action set");
  if (horizon < 1) throw ValidationError("TabularMDP: horizon must be at least 1");
  if (reward.rows() != n_states || reward.cols() != n_actions) {
    throw ValidationError("TabularMDP: reward shape mismatch");
  }
  for (double r : reward.data()) {
    if (!std::isfinite(r) || r < 0.0 || r > 1.0) {
      throw ValidationError("TabularMDP: rewards must lie in [0,1]");
    }
  }
  if (transition.rows() != n_states * n_actions || transition.cols() != n_states) {
    throw ValidationError("TabularMDP: transition shape mismatch");
  }
  for (std::size_t r = 0; r < transition.rows(); ++r) {
    double sum = 0.0;
    for (std::size_t s = 0; s < n_states; ++s) {
      double v = transition.at(r, s);
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw ValidationError("TabularMDP: transition row " + std::to_string(r) +
                              " has a bad entry");
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > DiscreteDist::kProbTolerance) {
      throw ValidationError("TabularMDP: transition row " + std::to_string(r) +
                            " sums to " + std::to_string(sum));
    }
  }
  if (init_dist.size() != n_states) throw ValidationError("TabularMDP: init_dist size mismatch");
  DiscreteDist check(init_dist);  // validates nonnegativity and total mass
}

namespace {

void check_rule(const TabularMDP& mdp, const Matrix& pi) {
  if (pi.rows() != mdp.n_states || pi.cols() != mdp.n_actions) {
    throw ValidationError("bellman_apply: decision rule shape mismatch");
  }
}

}  // namespace

std::vector<double> bellman_apply(const TabularMDP& mdp, const Matrix& pi,
                                  const std::vector<double>& v) {
  check_rule(mdp, pi);
  if (v.size() != mdp.n_states) throw ValidationError("bellman_apply: value size mismatch");
  std::vector<double> out(mdp.n_states, 0.0);
  for (std::size_t s = 0; s < mdp.n_states; ++s) {
    double val = 0.0;
    for (std::size_t a = 0; a < mdp.n_actions; ++a) {
      double w = pi.at(s, a);
      if (w == 0.0) continue;
      double q = mdp.reward.at(s, a);
      const double* row = mdp.transition.row(mdp.sa_row(s, a));
      for (std::size_t s2 = 0; s2 < mdp.n_states; ++s2) q += row[s2] * v[s2];
      val += w * q;
    }
    out[s] = val;
  }
  return out;
}

SolveResult solve_optimal(const TabularMDP& mdp) {
  mdp.validate();
  const std::size_t S = mdp.n_states, A = mdp.n_actions;
  const int H = mdp.horizon;
  SolveResult res;
  res.policy.steps.assign(H, Matrix(S, A, 0.0));
  res.values.v.assign(H, std::vector<double>(S, 0.0));
  std::vector<double> next(S, 0.0);
  for (int h = H - 1; h >= 0; --h) {
    for (std::size_t s = 0; s < S; ++s) {
      double best = -1.0;
      std::size_t best_a = 0;
      for (std::size_t a = 0; a < A; ++a) {
        double q = mdp.reward.at(s, a);
        const double* row = mdp.transition.row(mdp.sa_row(s, a));
        for (std::size_t s2 = 0; s2 < S; ++s2) q += row[s2] * next[s2];
        if (q > best) {
          best = q;
          best_a = a;
        }
      }
      res.values.v[h][s] = best;
      res.policy.steps[h].at(s, best_a) = 1.0;
    }
    next = res.values.v[h];
  }
  return res;
}

ValueTable policy_value(const TabularMDP& mdp, const NonStationaryPolicy& policy) {
  mdp.validate();
  if (policy.steps.size() != static_cast<std::size_t>(mdp.horizon)) {
    throw ValidationError("policy_value: policy length must equal the horizon");
  }
  ValueTable vt;
  vt.v.assign(mdp.horizon, std::vector<double>(mdp.n_states, 0.0));
  std::vector<double> next(mdp.n_states, 0.0);
  for (int h = mdp.horizon - 1; h >= 0; --h) {
    vt.v[h] = bellman_apply(mdp, policy.steps[h], next);
    next = vt.v[h];
  }
  return vt;
}

double initial_value(const TabularMDP& mdp, const ValueTable& values) {
  if (values.v.empty() || values.v[0].size() != mdp.n_states) {
    throw ValidationError("initial_value: value table shape mismatch");
  }
  double out = 0.0;
  for (std::size_t s = 0; s < mdp.n_states; ++s) out += mdp.init_dist[s] * values.v[0][s];
  return out;
}

double ve_distortion(const TabularMDP& m, const TabularMDP& m_hat,
                     const std::vector<Matrix>& policies,
                     const std::vector<std::vector<double>>& values) {
  if (m.n_states != m_hat.n_states || m.n_actions != m_hat.n_actions) {
    throw ValidationError("ve_distortion: MDPs must share a state/action space");
  }
  if (policies.empty() || values.empty()) {
    throw ValidationError("ve_distortion: need at least one decision rule and one value vector");
  }
  double worst = 0.0;
  for (const auto& v : values) {
    for (const auto& pi : policies) {
      std::vector<double> bv = bellman_apply(m, pi, v);
      std::vector<double> bv_hat = bellman_apply(m_hat, pi, v);
      for (std::size_t s = 0; s < m.n_states; ++s) {
        double diff = std::abs(bv[s] - bv_hat[s]);
        worst = std::max(worst, diff);
      }
    }
  }
  return worst * worst;
}

void to_json(nlohmann::json& j, const TabularMDP& mdp) {
  j = nlohmann::json{{"n_states", mdp.n_states},
                     {"n_actions", mdp.n_actions},
                     {"horizon", mdp.horizon},
                     {"reward", mdp.reward.data()},
                     {"transition", mdp.transition.data()},
                     {"init_dist", mdp.init_dist}};
}

void from_json(const nlohmann::json& j, TabularMDP& mdp) {
  mdp.n_states = j.at("n_states").get<std::size_t>();
  mdp.n_actions = j.at("n_actions").get<std::size_t>();
  mdp.horizon = j.at("horizon").get<int>();
  std::vector<double> reward = j.at("reward").get<std::vector<double>>();
  std::vector<double> transition = j.at("transition").get<std::vector<double>>();
  if (reward.size() != mdp.n_states * mdp.n_actions) {
    throw ValidationError("TabularMDP json: reward length mismatch");
  }
  if (transition.size() != mdp.n_states * mdp.n_actions * mdp.n_states) {
    throw ValidationError("TabularMDP json: transition length mismatch");
  }
  mdp.reward = Matrix(mdp.n_states, mdp.n_actions, std::move(reward));
  mdp.transition = Matrix(mdp.n_states * mdp.n_actions, mdp.n_states, std::move(transition));
  mdp.init_dist = j.at("init_dist").get<std::vector<double>>();
  mdp.validate();
}

}  // namespace clrl
