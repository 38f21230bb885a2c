#include "clrl/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include "clrl/errors.hpp"
#include "clrl/info.hpp"
#include "clrl/rd.hpp"
#include "clrl/version.hpp"

namespace clrl {

namespace {

using nlohmann::json;

std::string join_path(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

[[noreturn]] void fail_field(const std::string& path, const std::string& msg) {
  throw ValidationError("config: " + path + ": " + msg);
}

const json& require_key(const json& j, const std::string& path, const char* key) {
  if (!j.is_object()) fail_field(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail_field(join_path(path, key), "missing required field");
  return *it;
}

double get_number(const json& j, const std::string& path) {
  if (!j.is_number()) fail_field(path, "expected a number");
  return j.get<double>();
}

long get_integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail_field(path, "expected an integer");
  return j.get<long>();
}

std::string get_string(const json& j, const std::string& path) {
  if (!j.is_string()) fail_field(path, "expected a string");
  return j.get<std::string>();
}

std::vector<double> get_number_array(const json& j, const std::string& path) {
  if (!j.is_array()) fail_field(path, "expected an array of numbers");
  std::vector<double> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(get_number(j[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

DistortionKind parse_distortion(const json& j, const std::string& path) {
  std::string s = get_string(j, path);
  if (s == "linear-regret") return DistortionKind::kLinearRegret;
  if (s == "squared-regret") return DistortionKind::kSquaredRegret;
  fail_field(path, "expected \"linear-regret\" or \"squared-regret\"");
}

std::string format_g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

AgentConfig parse_bandit_agent(const json& j, const std::string& path,
                               const ExperimentConfig& defaults) {
  AgentConfig a;
  a.z_samples = defaults.z_samples;
  a.distortion = defaults.distortion;
  a.ba_iters = defaults.ba_iters;
  a.ba_tol = defaults.ba_tol;
  std::string name = get_string(require_key(j, path, "name"), join_path(path, "name"));
  bool beta_given = j.contains("beta");
  bool lambda_given = j.contains("lambda");
  if (name == "ts") {
    a.kind = BanditAgentKind::kThompson;
    a.label = "ts";
  } else if (name == "sts") {
    a.kind = BanditAgentKind::kSatisficing;
    a.epsilon = get_number(require_key(j, path, "epsilon"), join_path(path, "epsilon"));
    if (a.epsilon < 0.0) fail_field(join_path(path, "epsilon"), "must be nonnegative");
    a.label = "sts_eps" + format_g(a.epsilon);
  } else if (name == "blasts") {
    a.kind = BanditAgentKind::kBlasts;
    if (beta_given == lambda_given) {
      fail_field(path, "blasts agent needs exactly one of \"beta\" or \"lambda\"");
    }
    if (beta_given) {
      double beta = get_number(j["beta"], join_path(path, "beta"));
      if (beta <= 0.0) fail_field(join_path(path, "beta"), "must be positive");
      a.lambda = 1.0 / beta;
      a.label = "blasts_beta" + format_g(beta);
    } else {
      a.lambda = get_number(j["lambda"], join_path(path, "lambda"));
      if (a.lambda < 0.0) fail_field(join_path(path, "lambda"), "must be nonnegative");
      a.label = "blasts_lam" + format_g(a.lambda);
    }
  } else {
    fail_field(join_path(path, "name"), "expected \"ts\", \"sts\" or \"blasts\"");
  }
  if (j.contains("z_samples")) {
    long z = get_integer(j["z_samples"], join_path(path, "z_samples"));
    if (z < 1) fail_field(join_path(path, "z_samples"), "must be positive");
    a.z_samples = static_cast<std::size_t>(z);
  }
  if (j.contains("distortion")) {
    a.distortion = parse_distortion(j["distortion"], join_path(path, "distortion"));
  }
  if (j.contains("ba_iters")) {
    long it = get_integer(j["ba_iters"], join_path(path, "ba_iters"));
    if (it < 1) fail_field(join_path(path, "ba_iters"), "must be positive");
    a.ba_iters = static_cast<int>(it);
  }
  if (j.contains("ba_tol")) {
    a.ba_tol = get_number(j["ba_tol"], join_path(path, "ba_tol"));
    if (a.ba_tol < 0.0) fail_field(join_path(path, "ba_tol"), "must be nonnegative");
  }
  if (j.contains("label")) a.label = get_string(j["label"], join_path(path, "label"));
  return a;
}

MdpAgentSpec parse_mdp_agent(const json& j, const std::string& path,
                             const ExperimentConfig& defaults) {
  MdpAgentSpec a;
  a.ba_iters = defaults.ba_iters;
  a.ba_tol = defaults.ba_tol;
  std::string name = get_string(require_key(j, path, "name"), join_path(path, "name"));
  if (name == "psrl") {
    a.compress = false;
    a.label = "psrl";
  } else if (name == "vsrl") {
    a.compress = true;
    a.beta = get_number(require_key(j, path, "beta"), join_path(path, "beta"));
    if (a.beta < 0.0) fail_field(join_path(path, "beta"), "must be nonnegative");
    a.label = "vsrl_beta" + format_g(a.beta);
    long z = get_integer(require_key(j, path, "z_samples"), join_path(path, "z_samples"));
    if (z < 2) fail_field(join_path(path, "z_samples"), "must be at least 2");
    a.z_samples = static_cast<std::size_t>(z);
  } else {
    fail_field(join_path(path, "name"), "expected \"psrl\" or \"vsrl\"");
  }
  if (j.contains("ba_iters")) {
    long it = get_integer(j["ba_iters"], join_path(path, "ba_iters"));
    if (it < 1) fail_field(join_path(path, "ba_iters"), "must be positive");
    a.ba_iters = static_cast<int>(it);
  }
  if (j.contains("ba_tol")) {
    a.ba_tol = get_number(j["ba_tol"], join_path(path, "ba_tol"));
    if (a.ba_tol < 0.0) fail_field(join_path(path, "ba_tol"), "must be nonnegative");
  }
  if (j.contains("label")) a.label = get_string(j["label"], join_path(path, "label"));
  return a;
}

EnvSpec parse_env(const json& j, const std::string& path) {
  EnvSpec env;
  std::string type = get_string(require_key(j, path, "type"), join_path(path, "type"));
  if (type == "bernoulli" || type == "gaussian") {
    env.type = type == "bernoulli" ? EnvSpec::Type::kBernoulli : EnvSpec::Type::kGaussian;
    if (j.contains("means")) {
      env.fixed_means = get_number_array(j["means"], join_path(path, "means"));
      if (env.fixed_means.empty()) fail_field(join_path(path, "means"), "must be nonempty");
      env.arms = env.fixed_means.size();
      if (j.contains("arms") &&
          get_integer(j["arms"], join_path(path, "arms")) !=
              static_cast<long>(env.arms)) {
        fail_field(join_path(path, "arms"), "inconsistent with means length");
      }
    } else {
      long arms = get_integer(require_key(j, path, "arms"), join_path(path, "arms"));
      if (arms < 1) fail_field(join_path(path, "arms"), "must be positive");
      env.arms = static_cast<std::size_t>(arms);
    }
  } else if (type == "random-mdp") {
    env.type = EnvSpec::Type::kRandomMdp;
    long s = get_integer(require_key(j, path, "states"), join_path(path, "states"));
    long a = get_integer(require_key(j, path, "actions"), join_path(path, "actions"));
    long h = get_integer(require_key(j, path, "horizon"), join_path(path, "horizon"));
    if (s < 1) fail_field(join_path(path, "states"), "must be positive");
    if (a < 1) fail_field(join_path(path, "actions"), "must be positive");
    if (h < 1) fail_field(join_path(path, "horizon"), "must be positive");
    env.n_states = static_cast<std::size_t>(s);
    env.n_actions = static_cast<std::size_t>(a);
    env.mdp_horizon = static_cast<int>(h);
  } else if (type == "fixed-mdp") {
    env.type = EnvSpec::Type::kFixedMdp;
    const json& jm = require_key(j, path, "mdp");
    try {
      env.fixed_mdp = jm.get<TabularMDP>();
    } catch (const json::exception& e) {
      fail_field(join_path(path, "mdp"), e.what());
    }
    env.n_states = env.fixed_mdp->n_states;
    env.n_actions = env.fixed_mdp->n_actions;
    env.mdp_horizon = env.fixed_mdp->horizon;
  } else {
    fail_field(join_path(path, "type"),
               "expected \"bernoulli\", \"gaussian\", \"random-mdp\" or \"fixed-mdp\"");
  }
  return env;
}

BeliefState parse_belief(const json& j, const std::string& path) {
  std::string type = get_string(require_key(j, path, "type"), join_path(path, "type"));
  if (type == "gaussian") {
    std::vector<double> means =
        get_number_array(require_key(j, path, "means"), join_path(path, "means"));
    std::vector<double> vars;
    if (j.contains("vars")) {
      vars = get_number_array(j["vars"], join_path(path, "vars"));
    } else if (j.contains("stds")) {
      vars = get_number_array(j["stds"], join_path(path, "stds"));
      for (double& v : vars) v *= v;
    } else {
      fail_field(path, "gaussian belief needs \"vars\" or \"stds\"");
    }
    if (vars.size() != means.size()) fail_field(path, "means and variances differ in length");
    try {
      return BeliefState::gaussian(std::move(means), std::move(vars));
    } catch (const ValidationError& e) {
      fail_field(path, e.what());
    }
  }
  if (type == "bernoulli") {
    std::vector<double> alpha =
        get_number_array(require_key(j, path, "alpha"), join_path(path, "alpha"));
    std::vector<double> beta =
        get_number_array(require_key(j, path, "beta"), join_path(path, "beta"));
    try {
      return BeliefState::beta(std::move(alpha), std::move(beta));
    } catch (const ValidationError& e) {
      fail_field(path, e.what());
    }
  }
  fail_field(join_path(path, "type"), "expected \"gaussian\" or \"bernoulli\"");
}

std::string kind_name(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::kBanditRegret: return "bandit-regret";
    case ExperimentKind::kBanditRate: return "bandit-rate";
    case ExperimentKind::kRdCurve: return "rd-curve";
    case ExperimentKind::kMarginalSweep: return "marginal-sweep";
    case ExperimentKind::kMdpRegret: return "mdp-regret";
  }
  return "unknown";
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
  if (!j.is_object()) throw ValidationError("config: top level must be a JSON object");
  ExperimentConfig cfg;
  cfg.raw = j;
  std::string kind = get_string(require_key(j, "", "kind"), "kind");
  if (kind == "bandit-regret") {
    cfg.kind = ExperimentKind::kBanditRegret;
  } else if (kind == "bandit-rate") {
    cfg.kind = ExperimentKind::kBanditRate;
  } else if (kind == "rd-curve") {
    cfg.kind = ExperimentKind::kRdCurve;
  } else if (kind == "marginal-sweep") {
    cfg.kind = ExperimentKind::kMarginalSweep;
  } else if (kind == "mdp-regret") {
    cfg.kind = ExperimentKind::kMdpRegret;
  } else {
    fail_field("kind", "unknown experiment kind \"" + kind + "\"");
  }

  if (j.contains("seeds")) {
    const json& jseeds = j["seeds"];
    if (!jseeds.is_array() || jseeds.empty()) fail_field("seeds", "expected a nonempty array");
    for (std::size_t i = 0; i < jseeds.size(); ++i) {
      std::string p = "seeds[" + std::to_string(i) + "]";
      long s = get_integer(jseeds[i], p);
      if (s < 0) fail_field(p, "must be nonnegative");
      cfg.seeds.push_back(static_cast<std::uint64_t>(s));
    }
  } else if (cfg.kind == ExperimentKind::kRdCurve || cfg.kind == ExperimentKind::kMarginalSweep) {
    cfg.seeds = {1};
  } else {
    for (std::uint64_t s = 1; s <= 30; ++s) cfg.seeds.push_back(s);
  }

  if (j.contains("out")) {
    if (!j["out"].is_string()) fail_field("out", "expected a string");
    cfg.out_dir = j["out"].get<std::string>();
  }

  // Solver and sampling defaults, overridable per agent.
  if (j.contains("z_samples")) {
    long z = get_integer(j["z_samples"], "z_samples");
    if (z < 1) fail_field("z_samples", "must be positive");
    cfg.z_samples = static_cast<std::size_t>(z);
  }
  if (j.contains("distortion")) cfg.distortion = parse_distortion(j["distortion"], "distortion");
  if (j.contains("ba_iters")) {
    long it = get_integer(j["ba_iters"], "ba_iters");
    if (it < 1) fail_field("ba_iters", "must be positive");
    cfg.ba_iters = static_cast<int>(it);
  }
  if (j.contains("ba_tol")) {
    cfg.ba_tol = get_number(j["ba_tol"], "ba_tol");
    if (cfg.ba_tol < 0.0) fail_field("ba_tol", "must be nonnegative");
  }
  if (j.contains("entropy_samples")) {
    long n = get_integer(j["entropy_samples"], "entropy_samples");
    if (n < 1) fail_field("entropy_samples", "must be positive");
    cfg.entropy_samples = static_cast<int>(n);
  }

  auto check_unique_labels = [&](const std::vector<std::string>& labels) {
    for (std::size_t i = 0; i < labels.size(); ++i) {
      for (std::size_t k = i + 1; k < labels.size(); ++k) {
        if (labels[i] == labels[k]) {
          fail_field("agents", "duplicate agent label \"" + labels[i] +
                                   "\"; set distinct \"label\" fields");
        }
      }
    }
  };

  switch (cfg.kind) {
    case ExperimentKind::kBanditRegret:
    case ExperimentKind::kBanditRate: {
      cfg.env = parse_env(require_key(j, "", "env"), "env");
      if (cfg.env.type != EnvSpec::Type::kBernoulli && cfg.env.type != EnvSpec::Type::kGaussian) {
        fail_field("env.type", "bandit experiments need a bernoulli or gaussian environment");
      }
      if (cfg.env.type == EnvSpec::Type::kBernoulli) {
        for (double m : cfg.env.fixed_means) {
          if (m < 0.0 || m > 1.0) fail_field("env.means", "bernoulli means must lie in [0,1]");
        }
      }
      cfg.horizon = j.contains("horizon") ? get_integer(j["horizon"], "horizon") : 2000;
      if (cfg.horizon < 1) fail_field("horizon", "must be positive");
      const json& jagents = require_key(j, "", "agents");
      if (!jagents.is_array() || jagents.empty()) fail_field("agents", "expected a nonempty array");
      std::vector<std::string> labels;
      for (std::size_t i = 0; i < jagents.size(); ++i) {
        cfg.agents.push_back(
            parse_bandit_agent(jagents[i], "agents[" + std::to_string(i) + "]", cfg));
        labels.push_back(cfg.agents.back().label);
      }
      check_unique_labels(labels);
      break;
    }
    case ExperimentKind::kRdCurve: {
      cfg.env = parse_env(require_key(j, "", "env"), "env");
      if (cfg.env.type != EnvSpec::Type::kBernoulli && cfg.env.type != EnvSpec::Type::kGaussian) {
        fail_field("env.type", "rd-curve needs a bernoulli or gaussian environment");
      }
      if (cfg.seeds.size() != 1) fail_field("seeds", "rd-curve uses exactly one seed");
      cfg.betas = get_number_array(require_key(j, "", "betas"), "betas");
      if (cfg.betas.empty()) fail_field("betas", "must be nonempty");
      for (std::size_t i = 0; i < cfg.betas.size(); ++i) {
        if (cfg.betas[i] < 0.0) fail_field("betas[" + std::to_string(i) + "]", "must be nonnegative");
      }
      if (j.contains("epsilons")) {
        cfg.epsilons = get_number_array(j["epsilons"], "epsilons");
        for (std::size_t i = 0; i < cfg.epsilons.size(); ++i) {
          if (cfg.epsilons[i] < 0.0) {
            fail_field("epsilons[" + std::to_string(i) + "]", "must be nonnegative");
          }
        }
      }
      if (cfg.z_samples < 2) fail_field("z_samples", "must be at least 2");
      break;
    }
    case ExperimentKind::kMarginalSweep: {
      cfg.belief = parse_belief(require_key(j, "", "belief"), "belief");
      if (cfg.seeds.size() != 1) fail_field("seeds", "marginal-sweep uses exactly one seed");
      cfg.lambdas = get_number_array(require_key(j, "", "lambdas"), "lambdas");
      if (cfg.lambdas.empty()) fail_field("lambdas", "must be nonempty");
      for (std::size_t i = 0; i < cfg.lambdas.size(); ++i) {
        if (cfg.lambdas[i] < 0.0) fail_field("lambdas[" + std::to_string(i) + "]", "must be nonnegative");
      }
      if (j.contains("ts_samples")) {
        cfg.ts_samples = get_integer(j["ts_samples"], "ts_samples");
        if (cfg.ts_samples < 1) fail_field("ts_samples", "must be positive");
      }
      break;
    }
    case ExperimentKind::kMdpRegret: {
      cfg.env = parse_env(require_key(j, "", "env"), "env");
      if (cfg.env.type != EnvSpec::Type::kRandomMdp && cfg.env.type != EnvSpec::Type::kFixedMdp) {
        fail_field("env.type", "mdp-regret needs a random-mdp or fixed-mdp environment");
      }
      cfg.episodes = j.contains("episodes") ? get_integer(j["episodes"], "episodes") : 500;
      if (cfg.episodes < 1) fail_field("episodes", "must be positive");
      const json& jagents = require_key(j, "", "agents");
      if (!jagents.is_array() || jagents.empty()) fail_field("agents", "expected a nonempty array");
      std::vector<std::string> labels;
      for (std::size_t i = 0; i < jagents.size(); ++i) {
        cfg.mdp_agents.push_back(
            parse_mdp_agent(jagents[i], "agents[" + std::to_string(i) + "]", cfg));
        labels.push_back(cfg.mdp_agents.back().label);
      }
      check_unique_labels(labels);
      break;
    }
  }
  return cfg;
}

std::string csv_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

MeanStderr mean_stderr(const std::vector<double>& xs) {
  if (xs.empty()) throw ValidationError("mean_stderr: empty input");
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  if (xs.size() == 1) return {mean, 0.0};
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  double var = ss / static_cast<double>(xs.size() - 1);
  return {mean, std::sqrt(var / static_cast<double>(xs.size()))};
}

AggregateSeries aggregate_seeds(const std::vector<std::vector<double>>& per_seed) {
  if (per_seed.empty()) throw ValidationError("aggregate_seeds: no series");
  const std::size_t T = per_seed[0].size();
  for (const auto& s : per_seed) {
    if (s.size() != T) throw ValidationError("aggregate_seeds: series length mismatch");
  }
  AggregateSeries agg;
  agg.n_seeds = per_seed.size();
  agg.mean.resize(T);
  agg.stderr_.resize(T);
  std::vector<double> xs(per_seed.size());
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t i = 0; i < per_seed.size(); ++i) xs[i] = per_seed[i][t];
    MeanStderr ms = mean_stderr(xs);
    agg.mean[t] = ms.mean;
    agg.stderr_[t] = ms.stderr_;
  }
  return agg;
}

double estimate_optimal_action_entropy(const BeliefState& belief, long n_samples, Rng& rng) {
  if (n_samples < 1) throw ValidationError("estimate_optimal_action_entropy: need samples");
  std::vector<double> tally(belief.arms(), 0.0);
  for (long i = 0; i < n_samples; ++i) {
    BanditEnv env = sample_env(belief, rng);
    double best = *std::max_element(env.means.begin(), env.means.end());
    std::size_t ties = 0;
    for (double m : env.means) {
      if (m == best) ++ties;
    }
    double w = 1.0 / static_cast<double>(ties);
    for (std::size_t a = 0; a < env.means.size(); ++a) {
      if (env.means[a] == best) tally[a] += w;
    }
  }
  for (double& t : tally) t /= static_cast<double>(n_samples);
  return entropy(DiscreteDist(std::move(tally)));
}

double estimate_satisficing_entropy(const BeliefState& belief, double epsilon, long n_samples,
                                    Rng& rng) {
  if (n_samples < 1) throw ValidationError("estimate_satisficing_entropy: need samples");
  if (epsilon < 0.0) throw ValidationError("estimate_satisficing_entropy: epsilon >= 0");
  std::vector<double> tally(belief.arms(), 0.0);
  for (long i = 0; i < n_samples; ++i) {
    BanditEnv env = sample_env(belief, rng);
    double best = *std::max_element(env.means.begin(), env.means.end());
    for (std::size_t a = 0; a < env.means.size(); ++a) {
      if (best - env.means[a] <= epsilon) {
        tally[a] += 1.0;
        break;
      }
    }
  }
  for (double& t : tally) t /= static_cast<double>(n_samples);
  return entropy(DiscreteDist(std::move(tally)));
}

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace

InfoRatioEstimate estimate_information_ratio(const BeliefState& belief, const AgentConfig& agent,
                                             long n_samples, Rng& rng) {
  if (n_samples < 2) throw ValidationError("estimate_information_ratio: need samples");
  const std::size_t arms = belief.arms();
  std::vector<std::vector<double>> means;
  means.reserve(n_samples);
  for (long i = 0; i < n_samples; ++i) means.push_back(sample_env(belief, rng).means);

  // Target channel rows: the conditional law of the learning target given the
  // sampled environment.
  Matrix tgt(n_samples, arms, 0.0);
  if (agent.kind == BanditAgentKind::kThompson) {
    for (long i = 0; i < n_samples; ++i) {
      double best = *std::max_element(means[i].begin(), means[i].end());
      std::size_t ties = 0;
      for (double m : means[i]) {
        if (m == best) ++ties;
      }
      for (std::size_t a = 0; a < arms; ++a) {
        if (means[i][a] == best) tgt.at(i, a) = 1.0 / static_cast<double>(ties);
      }
    }
  } else if (agent.kind == BanditAgentKind::kSatisficing) {
    for (long i = 0; i < n_samples; ++i) {
      double best = *std::max_element(means[i].begin(), means[i].end());
      for (std::size_t a = 0; a < arms; ++a) {
        if (best - means[i][a] <= agent.epsilon) {
          tgt.at(i, a) = 1.0;
          break;
        }
      }
    }
  } else {
    DistortionMatrix d = regret_distortion(means, agent.distortion);
    EmpiricalSource src = EmpiricalSource::uniform(means.size());
    Channel ch = [&] {
      if (agent.lambda == 0.0) return min_distortion_channel(d);
      BaOptions opts;
      opts.max_iters = agent.ba_iters;
      opts.tol = agent.ba_tol;
      return blahut_arimoto(src, d, 1.0 / agent.lambda, opts).channel;
    }();
    tgt = ch.matrix();
  }

  std::vector<double> pi(arms, 0.0), mean_reward(arms, 0.0);
  double e_target = 0.0;
  for (long i = 0; i < n_samples; ++i) {
    for (std::size_t a = 0; a < arms; ++a) {
      pi[a] += tgt.at(i, a);
      mean_reward[a] += means[i][a];
      e_target += tgt.at(i, a) * means[i][a];
    }
  }
  for (std::size_t a = 0; a < arms; ++a) {
    pi[a] /= static_cast<double>(n_samples);
    mean_reward[a] /= static_cast<double>(n_samples);
  }
  e_target /= static_cast<double>(n_samples);
  double e_play = 0.0;
  for (std::size_t a = 0; a < arms; ++a) e_play += pi[a] * mean_reward[a];
  double numerator = (e_target - e_play) * (e_target - e_play);

  // Reward discretization for the information term.
  std::size_t bins;
  std::vector<double> edges;  // interior edges; implicit -inf / +inf ends
  if (belief.kind() == RewardKind::kBernoulli) {
    bins = 2;
  } else {
    bins = 16;
    double lo = means[0][0], hi = means[0][0];
    for (const auto& m : means) {
      for (double v : m) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
    lo -= 4.0;
    hi += 4.0;
    for (std::size_t b = 1; b < bins; ++b) {
      edges.push_back(lo + (hi - lo) * static_cast<double>(b) / static_cast<double>(bins));
    }
  }

  std::vector<double> joint(arms * arms * bins, 0.0);
  std::vector<double> pbin(bins);
  const double inv_n = 1.0 / static_cast<double>(n_samples);
  for (long i = 0; i < n_samples; ++i) {
    for (std::size_t a = 0; a < arms; ++a) {
      double m = means[i][a];
      if (belief.kind() == RewardKind::kBernoulli) {
        pbin[0] = 1.0 - m;
        pbin[1] = m;
      } else {
        double prev = 0.0;
        for (std::size_t b = 0; b + 1 < bins; ++b) {
          double c = normal_cdf(edges[b] - m);
          pbin[b] = c - prev;
          prev = c;
        }
        pbin[bins - 1] = 1.0 - prev;
      }
      for (std::size_t tg = 0; tg < arms; ++tg) {
        double w = tgt.at(i, tg);
        if (w == 0.0) continue;
        double base = inv_n * w * pi[a];
        for (std::size_t b = 0; b < bins; ++b) {
          joint[(tg * arms + a) * bins + b] += base * pbin[b];
        }
      }
    }
  }
  double info = mutual_information(JointDist(arms, arms * bins, std::move(joint)));

  InfoRatioEstimate est;
  est.regret_sq = numerator;
  est.information_nats = info;
  est.n_samples = n_samples;
  if (info >= 1e-12) est.ratio = numerator / info;
  return est;
}

namespace {

// Runs f(i) for every seed index, spreading work over hardware threads when
// more than one is available. Per-seed failures are collected and reported
// together; results must be written into per-index slots by f.
template <typename F>
void for_each_seed(const std::vector<std::uint64_t>& seeds, F&& f) {
  const std::size_t n = seeds.size();
  std::vector<std::exception_ptr> errors(n);
  unsigned hw = std::thread::hardware_concurrency();
  std::size_t workers = std::min<std::size_t>(hw == 0 ? 1 : hw, n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) {
      try {
        f(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) {
        try {
          f(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  std::string report;
  for (std::size_t i = 0; i < n; ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const std::exception& e) {
      if (!report.empty()) report += "; ";
      report += "seed " + std::to_string(seeds[i]) + ": " + e.what();
    }
  }
  if (!report.empty()) throw RuntimeFailure("experiment failed: " + report);
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream f(p, std::ios::trunc);
  if (!f) throw RuntimeFailure("cannot write output file: " + p.string());
  return f;
}

void write_manifest(const ExperimentConfig& cfg, const std::filesystem::path& dir,
                    const std::vector<std::string>& override_echo, ExperimentResult& res) {
  json m;
  m["version"] = kVersion;
  m["kind"] = kind_name(cfg.kind);
  m["seeds"] = cfg.seeds;
  m["overrides"] = override_echo;
  m["config"] = cfg.raw;
  auto f = open_out(dir / "manifest.json");
  f << m.dump(2) << "\n";
  res.files_written.push_back("manifest.json");
}

BeliefState bandit_prior(const EnvSpec& env) {
  if (env.type == EnvSpec::Type::kBernoulli) return BeliefState::beta_uniform(env.arms);
  return BeliefState::gaussian_standard(env.arms);
}

BanditEnv draw_bandit_env(const EnvSpec& env, std::uint64_t seed) {
  if (!env.fixed_means.empty()) {
    return env.type == EnvSpec::Type::kBernoulli ? BanditEnv::bernoulli(env.fixed_means)
                                                 : BanditEnv::gaussian(env.fixed_means);
  }
  Rng rng = make_stream(seed, {stream::kEnv});
  return sample_env(bandit_prior(env), rng);
}

struct BanditSeedSeries {
  std::vector<std::vector<double>> cum_regret;  // [agent][t]
  std::vector<std::vector<double>> rate;        // [agent][t]; rate experiments only
};

BanditSeedSeries run_bandit_seed(const ExperimentConfig& cfg, std::uint64_t seed) {
  const bool want_rate = cfg.kind == ExperimentKind::kBanditRate;
  BanditEnv env = draw_bandit_env(cfg.env, seed);
  BanditSeedSeries out;
  out.cum_regret.assign(cfg.agents.size(), std::vector<double>(cfg.horizon, 0.0));
  if (want_rate) out.rate.assign(cfg.agents.size(), std::vector<double>(cfg.horizon, 0.0));
  for (std::size_t ai = 0; ai < cfg.agents.size(); ++ai) {
    BanditAgentState state{cfg.agents[ai], bandit_prior(cfg.env)};
    double cum = 0.0;
    for (long t = 1; t <= cfg.horizon; ++t) {
      std::optional<double> rate;
      if (want_rate && state.cfg.kind != BanditAgentKind::kBlasts) {
        Rng diag = make_stream(seed, {stream::kDiagnostics, static_cast<std::uint64_t>(ai),
                                      static_cast<std::uint64_t>(t)});
        rate = state.cfg.kind == BanditAgentKind::kThompson
                   ? estimate_optimal_action_entropy(state.belief, cfg.entropy_samples, diag)
                   : estimate_satisficing_entropy(state.belief, state.cfg.epsilon,
                                                  cfg.entropy_samples, diag);
      }
      Rng rng = make_stream(seed, {stream::kAgentStep, static_cast<std::uint64_t>(ai),
                                   static_cast<std::uint64_t>(t)});
      StepDiagnostics diag = run_bandit_step(state, env, t, rng);
      cum += diag.expected_regret;
      out.cum_regret[ai][t - 1] = cum;
      if (want_rate) {
        out.rate[ai][t - 1] = diag.rate_nats ? *diag.rate_nats : rate.value_or(0.0);
      }
    }
  }
  return out;
}

void write_series_csvs(const ExperimentConfig& cfg, const std::filesystem::path& dir,
                       const std::vector<std::string>& labels,
                       const std::vector<std::vector<std::vector<double>>>& series,  // [seed][agent][t]
                       const std::string& value_name, const std::string& base_name,
                       ExperimentResult& res) {
  const long T = static_cast<long>(series[0][0].size());
  {
    auto f = open_out(dir / (base_name + ".csv"));
    f << "seed,t,agent," << value_name << "\n";
    for (std::size_t si = 0; si < cfg.seeds.size(); ++si) {
      for (long t = 1; t <= T; ++t) {
        for (std::size_t ai = 0; ai < labels.size(); ++ai) {
          f << cfg.seeds[si] << ',' << t << ',' << labels[ai] << ','
            << csv_double(series[si][ai][t - 1]) << "\n";
        }
      }
    }
    res.files_written.push_back(base_name + ".csv");
  }
  {
    auto f = open_out(dir / (base_name + "_agg.csv"));
    f << "t,agent,mean,stderr\n";
    std::vector<AggregateSeries> agg(labels.size());
    std::vector<std::vector<double>> rows(cfg.seeds.size());
    for (std::size_t ai = 0; ai < labels.size(); ++ai) {
      for (std::size_t si = 0; si < cfg.seeds.size(); ++si) rows[si] = series[si][ai];
      agg[ai] = aggregate_seeds(rows);
    }
    for (long t = 1; t <= T; ++t) {
      for (std::size_t ai = 0; ai < labels.size(); ++ai) {
        f << t << ',' << labels[ai] << ',' << csv_double(agg[ai].mean[t - 1]) << ','
          << csv_double(agg[ai].stderr_[t - 1]) << "\n";
      }
    }
    res.files_written.push_back(base_name + "_agg.csv");
  }
}

void run_bandit_experiment(const ExperimentConfig& cfg, const std::filesystem::path& dir,
                           ExperimentResult& res) {
  std::vector<BanditSeedSeries> per_seed(cfg.seeds.size());
  for_each_seed(cfg.seeds, [&](std::size_t i) { per_seed[i] = run_bandit_seed(cfg, cfg.seeds[i]); });
  std::vector<std::string> labels;
  for (const auto& a : cfg.agents) labels.push_back(a.label);
  std::vector<std::vector<std::vector<double>>> regret(cfg.seeds.size());
  for (std::size_t i = 0; i < cfg.seeds.size(); ++i) regret[i] = per_seed[i].cum_regret;
  write_series_csvs(cfg, dir, labels, regret, "cum_regret", "regret", res);
  if (cfg.kind == ExperimentKind::kBanditRate) {
    std::vector<std::vector<std::vector<double>>> rate(cfg.seeds.size());
    for (std::size_t i = 0; i < cfg.seeds.size(); ++i) rate[i] = per_seed[i].rate;
    write_series_csvs(cfg, dir, labels, rate, "rate_nats", "rate", res);
  }
}

void run_rd_curve_experiment(const ExperimentConfig& cfg, const std::filesystem::path& dir,
                             ExperimentResult& res) {
  const std::uint64_t seed = cfg.seeds[0];
  Rng rng = make_stream(seed, {stream::kEnv});
  BeliefState prior = bandit_prior(cfg.env);
  std::vector<std::vector<double>> samples;
  samples.reserve(cfg.z_samples);
  for (std::size_t z = 0; z < cfg.z_samples; ++z) samples.push_back(sample_env(prior, rng).means);
  DistortionMatrix d = regret_distortion(samples, cfg.distortion);
  EmpiricalSource src = EmpiricalSource::uniform(cfg.z_samples);
  BaOptions opts;
  opts.max_iters = cfg.ba_iters;
  opts.tol = cfg.ba_tol;
  std::vector<RateDistortionPoint> curve = rd_curve(src, d, cfg.betas, opts);
  {
    auto f = open_out(dir / "blasts_beta_curve.csv");
    write_rd_curve_csv(f, curve);
    res.files_written.push_back("blasts_beta_curve.csv");
  }
  auto f = open_out(dir / "rd_curve.csv");
  f << "agent,param,rate_nats,distortion\n";
  for (const auto& p : curve) {
    f << "blasts," << csv_double(p.beta) << ',' << csv_double(p.rate_nats) << ','
      << csv_double(p.distortion) << "\n";
  }
  const std::size_t arms = samples[0].size();
  for (double eps : cfg.epsilons) {
    std::vector<double> tally(arms, 0.0);
    double dist = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      double best = *std::max_element(samples[i].begin(), samples[i].end());
      for (std::size_t a = 0; a < arms; ++a) {
        if (best - samples[i][a] <= eps) {
          tally[a] += 1.0;
          dist += d.d.at(i, a);
          break;
        }
      }
    }
    for (double& t : tally) t /= static_cast<double>(samples.size());
    dist /= static_cast<double>(samples.size());
    f << "sts," << csv_double(eps) << ',' << csv_double(entropy(DiscreteDist(tally))) << ','
      << csv_double(dist) << "\n";
  }
  res.files_written.push_back("rd_curve.csv");
}

void run_marginal_sweep(const ExperimentConfig& cfg, const std::filesystem::path& dir,
                        ExperimentResult& res) {
  const std::uint64_t seed = cfg.seeds[0];
  const BeliefState& belief = *cfg.belief;
  const std::size_t arms = belief.arms();
  std::vector<double> ts_prob(arms, 0.0);
  {
    Rng rng = make_stream(seed, {stream::kDiagnostics, 0});
    for (long i = 0; i < cfg.ts_samples; ++i) {
      BanditEnv env = sample_env(belief, rng);
      double best = *std::max_element(env.means.begin(), env.means.end());
      std::size_t ties = 0;
      for (double m : env.means) {
        if (m == best) ++ties;
      }
      double w = 1.0 / static_cast<double>(ties);
      for (std::size_t a = 0; a < arms; ++a) {
        if (env.means[a] == best) ts_prob[a] += w;
      }
    }
    for (double& p : ts_prob) p /= static_cast<double>(cfg.ts_samples);
  }
  auto f = open_out(dir / "marginal.csv");
  f << "lambda,arm,blasts_prob,ts_prob\n";
  for (std::size_t li = 0; li < cfg.lambdas.size(); ++li) {
    AgentConfig a;
    a.kind = BanditAgentKind::kBlasts;
    a.lambda = cfg.lambdas[li];
    a.z_samples = cfg.z_samples;
    a.distortion = cfg.distortion;
    a.ba_iters = cfg.ba_iters;
    a.ba_tol = cfg.ba_tol;
    Rng rng = make_stream(seed, {stream::kAgentStep, static_cast<std::uint64_t>(li)});
    DiscreteDist q = blasts_marginal(belief, a, rng);
    for (std::size_t arm = 0; arm < arms; ++arm) {
      f << csv_double(cfg.lambdas[li]) << ',' << arm << ',' << csv_double(q[arm]) << ','
        << csv_double(ts_prob[arm]) << "\n";
    }
  }
  res.files_written.push_back("marginal.csv");
}

struct MdpSeedSeries {
  std::vector<std::vector<double>> cum_regret;  // [agent][episode]
  std::vector<std::vector<double>> rate;        // [agent][episode]; compression agents only
};

MdpSeedSeries run_mdp_seed(const ExperimentConfig& cfg, std::uint64_t seed) {
  TabularMDP true_mdp;
  std::vector<double> init(cfg.env.n_states, 1.0 / static_cast<double>(cfg.env.n_states));
  if (cfg.env.type == EnvSpec::Type::kFixedMdp) {
    true_mdp = *cfg.env.fixed_mdp;
    init = true_mdp.init_dist;
  } else {
    MdpPosterior prior =
        MdpPosterior::uniform(cfg.env.n_states, cfg.env.n_actions, cfg.env.mdp_horizon, init);
    Rng env_rng = make_stream(seed, {stream::kEnv});
    true_mdp = sample_mdp(prior, env_rng);
  }
  SolveResult opt = solve_optimal(true_mdp);
  double vstar = initial_value(true_mdp, opt.values);

  MdpSeedSeries out;
  out.cum_regret.assign(cfg.mdp_agents.size(), std::vector<double>(cfg.episodes, 0.0));
  out.rate.assign(cfg.mdp_agents.size(), std::vector<double>(cfg.episodes, 0.0));
  for (std::size_t ai = 0; ai < cfg.mdp_agents.size(); ++ai) {
    const MdpAgentSpec& spec = cfg.mdp_agents[ai];
    MdpPosterior post = MdpPosterior::uniform(true_mdp.n_states, true_mdp.n_actions,
                                              true_mdp.horizon, true_mdp.init_dist);
    double cum = 0.0;
    for (long k = 1; k <= cfg.episodes; ++k) {
      Rng rng = make_stream(seed, {stream::kAgentStep, static_cast<std::uint64_t>(ai),
                                   static_cast<std::uint64_t>(k)});
      NonStationaryPolicy policy;
      if (spec.compress) {
        BaOptions opts;
        opts.max_iters = spec.ba_iters;
        opts.tol = spec.ba_tol;
        VsrlEpisode ep = vsrl_episode_policy(post, spec.beta, spec.z_samples, rng, opts);
        policy = std::move(ep.policy);
        out.rate[ai][k - 1] = ep.rate_nats;
      } else {
        policy = psrl_episode_policy(post, rng);
      }
      double vpi = initial_value(true_mdp, policy_value(true_mdp, policy));
      cum += vstar - vpi;
      out.cum_regret[ai][k - 1] = cum;
      EpisodeTrajectory traj = run_episode(true_mdp, policy, rng);
      post = update_mdp_posterior(post, traj);
    }
  }
  return out;
}

void run_mdp_experiment(const ExperimentConfig& cfg, const std::filesystem::path& dir,
                        ExperimentResult& res) {
  std::vector<MdpSeedSeries> per_seed(cfg.seeds.size());
  for_each_seed(cfg.seeds, [&](std::size_t i) { per_seed[i] = run_mdp_seed(cfg, cfg.seeds[i]); });
  std::vector<std::string> labels;
  for (const auto& a : cfg.mdp_agents) labels.push_back(a.label);
  std::vector<std::vector<std::vector<double>>> regret(cfg.seeds.size());
  for (std::size_t i = 0; i < cfg.seeds.size(); ++i) regret[i] = per_seed[i].cum_regret;
  write_series_csvs(cfg, dir, labels, regret, "cum_regret", "regret", res);

  std::vector<std::size_t> vsrl_idx;
  for (std::size_t ai = 0; ai < cfg.mdp_agents.size(); ++ai) {
    if (cfg.mdp_agents[ai].compress) vsrl_idx.push_back(ai);
  }
  if (vsrl_idx.empty()) return;
  std::vector<std::string> vsrl_labels;
  for (std::size_t ai : vsrl_idx) vsrl_labels.push_back(labels[ai]);
  std::vector<std::vector<std::vector<double>>> rate(cfg.seeds.size());
  for (std::size_t i = 0; i < cfg.seeds.size(); ++i) {
    for (std::size_t ai : vsrl_idx) rate[i].push_back(per_seed[i].rate[ai]);
  }
  write_series_csvs(cfg, dir, vsrl_labels, rate, "rate_nats", "rate", res);
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                                const std::vector<std::string>& override_echo) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw RuntimeFailure("cannot create output directory " + out_dir.string() + ": " +
                               ec.message());
  ExperimentResult res;
  switch (cfg.kind) {
    case ExperimentKind::kBanditRegret:
    case ExperimentKind::kBanditRate:
      run_bandit_experiment(cfg, out_dir, res);
      break;
    case ExperimentKind::kRdCurve:
      run_rd_curve_experiment(cfg, out_dir, res);
      break;
    case ExperimentKind::kMarginalSweep:
      run_marginal_sweep(cfg, out_dir, res);
      break;
    case ExperimentKind::kMdpRegret:
      run_mdp_experiment(cfg, out_dir, res);
      break;
  }
  write_manifest(cfg, out_dir, override_echo, res);
  return res;
}

}  // namespace clrl
