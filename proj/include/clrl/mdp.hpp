#pragma once

#include <cstddef>
#include <vector>

#include <json.hpp>

#include "clrl/info.hpp"
#include "clrl/matrix.hpp"
#include "clrl/rng.hpp"

namespace clrl {

// Finite-horizon tabular MDP. Rewards live in [0,1]; transitions are stored
// as an (S*A) x S row-stochastic matrix with row index s * n_actions + a.
struct TabularMDP {
  std::size_t n_states = 0;
  std::size_t n_actions = 0;
  int horizon = 0;
  Matrix reward;               // S x A
  Matrix transition;           // (S*A) x S
  std::vector<double> init_dist;

  std::size_t sa_row(std::size_t s, std::size_t a) const { return s * n_actions + a; }
  void validate() const;
};

// Per-step S x A row-stochastic decision rules, one per horizon step.
struct NonStationaryPolicy {
  std::vector<Matrix> steps;
};

// Per-step state values; v[h] is the S-vector of values with h..H-1 steps to
// go, plus an implicit zero terminal value.
struct ValueTable {
  std::vector<std::vector<double>> v;
};

// One application of the policy Bellman operator for decision rule pi
// (S x A row-stochastic) against continuation values v.
std::vector<double> bellman_apply(const TabularMDP& mdp, const Matrix& pi,
                                  const std::vector<double>& v);

// Backward induction; greedy ties resolved to the lowest action index.
struct SolveResult {
  NonStationaryPolicy policy;
  ValueTable values;
};
SolveResult solve_optimal(const TabularMDP& mdp);

// Value of a given nonstationary policy.
ValueTable policy_value(const TabularMDP& mdp, const NonStationaryPolicy& policy);

// Expected value at the initial distribution.
double initial_value(const TabularMDP& mdp, const ValueTable& values);

// Value-equivalence distortion between two MDPs over the same state/action
// space: the largest squared discrepancy, over the supplied decision rules
// and value vectors, of a single Bellman backup.
double ve_distortion(const TabularMDP& m, const TabularMDP& m_hat,
                     const std::vector<Matrix>& policies,
                     const std::vector<std::vector<double>>& values);

void to_json(nlohmann::json& j, const TabularMDP& mdp);
void from_json(const nlohmann::json& j, TabularMDP& mdp);

}  // namespace clrl
