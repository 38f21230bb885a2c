#pragma once

// Independent reference implementations used to cross-check the library.
// Everything here is written from first principles with plain loops and
// quadrature so that agreement with the optimized code is meaningful.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

#include "clrl/mdp.hpp"
#include "clrl/rd.hpp"

namespace oracle {

inline double binary_entropy_nats(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log(p) - (1.0 - p) * std::log(1.0 - p);
}

// Rate-distortion function of a Bernoulli(p) source under Hamming distortion,
// in nats: R(D) = h(p) - h(D) for D < min(p, 1-p), else 0.
inline double binary_rd_rate(double p, double d) {
  double dmax = std::min(p, 1.0 - p);
  if (d >= dmax) return 0.0;
  return binary_entropy_nats(p) - binary_entropy_nats(d);
}

inline double entropy_nats(const std::vector<double>& p) {
  double h = 0.0;
  for (double x : p) {
    if (x > 0.0) h -= x * std::log(x);
  }
  return h;
}

// P(X > Y) for independent X ~ Beta(a1,b1), Y ~ Beta(a2,b2) by 2-d composite
// Simpson quadrature on [0,1]^2. Accurate to ~1e-7 for modest parameters.
inline double beta_pdf(double x, double a, double b) {
  if (x <= 0.0 || x >= 1.0) {
    // Limits of x^(a-1)(1-x)^(b-1); only the a,b >= 1 cases arise in tests.
    if (x == 0.0 && a == 1.0) return std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b));
    if (x == 1.0 && b == 1.0) return std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b));
    return 0.0;
  }
  double lg = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b);
  return std::exp(lg + (a - 1.0) * std::log(x) + (b - 1.0) * std::log(1.0 - x));
}

inline double beta_prob_greater(double a1, double b1, double a2, double b2, int n = 2000) {
  // Simpson weights over an even number of panels.
  auto simpson = [&](auto f) {
    double h = 1.0 / n;
    double s = f(0.0) + f(1.0);
    for (int i = 1; i < n; ++i) s += f(i * h) * (i % 2 == 1 ? 4.0 : 2.0);
    return s * h / 3.0;
  };
  // Inner integral: F_Y(x) via Simpson each time is O(n^2); precompute the CDF
  // of Y on the same grid by cumulative Simpson on pairs of panels.
  std::vector<double> cdf(n + 1, 0.0);
  double h = 1.0 / n;
  for (int i = 2; i <= n; i += 2) {
    double x0 = (i - 2) * h, x1 = (i - 1) * h, x2 = i * h;
    cdf[i] = cdf[i - 2] + h / 3.0 * (beta_pdf(x0, a2, b2) + 4.0 * beta_pdf(x1, a2, b2) +
                                     beta_pdf(x2, a2, b2));
    cdf[i - 1] = 0.5 * (cdf[i - 2] + cdf[i]);
  }
  int idx = 0;
  auto integrand = [&](double x) {
    double fi = beta_pdf(x, a1, b1);
    double fy = cdf[idx];
    ++idx;
    return fi * fy;
  };
  (void)simpson;
  // Use Simpson weights explicitly so idx walks the grid once in order.
  double s = 0.0;
  idx = 0;
  for (int i = 0; i <= n; ++i) {
    double w = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    s += w * integrand(i * h);
  }
  return s * h / 3.0;
}

// Lagrangian I(source; output) + beta * E[d] of an explicit channel, computed
// with direct sums (no shared code with the solver).
inline double lagrangian(const std::vector<double>& w, const std::vector<std::vector<double>>& d,
                         double beta, const std::vector<std::vector<double>>& rows) {
  std::size_t zn = w.size(), kn = d[0].size();
  std::vector<double> q(kn, 0.0);
  for (std::size_t z = 0; z < zn; ++z) {
    for (std::size_t a = 0; a < kn; ++a) q[a] += w[z] * rows[z][a];
  }
  double mi = 0.0, dist = 0.0;
  for (std::size_t z = 0; z < zn; ++z) {
    for (std::size_t a = 0; a < kn; ++a) {
      double p = w[z] * rows[z][a];
      if (p > 0.0 && q[a] > 0.0) mi += p * std::log(rows[z][a] / q[a]);
      dist += p * d[z][a];
    }
  }
  return mi + beta * dist;
}

// Dual objective of the channel Lagrangian as a function of the output
// marginal q: F(q) = sum_z w_z * (-log sum_a q_a exp(-beta d(z,a))).
// min over channels of the Lagrangian equals min over q of F(q).
inline double dual_objective(const std::vector<double>& w,
                             const std::vector<std::vector<double>>& d, double beta,
                             const std::vector<double>& q) {
  double f = 0.0;
  for (std::size_t z = 0; z < w.size(); ++z) {
    double s = 0.0;
    for (std::size_t a = 0; a < q.size(); ++a) s += q[a] * std::exp(-beta * d[z][a]);
    f += w[z] * (-std::log(s));
  }
  return f;
}

// Exhaustive grid search over output marginals with the given step.
// Supports 2 or 3 actions.
inline double grid_min_dual(const std::vector<double>& w,
                            const std::vector<std::vector<double>>& d, double beta, double step) {
  std::size_t kn = d[0].size();
  int n = static_cast<int>(std::lround(1.0 / step));
  double best = std::numeric_limits<double>::infinity();
  if (kn == 2) {
    for (int i = 0; i <= n; ++i) {
      std::vector<double> q{i * step, 1.0 - i * step};
      best = std::min(best, dual_objective(w, d, beta, q));
    }
  } else if (kn == 3) {
    for (int i = 0; i <= n; ++i) {
      for (int k = 0; i + k <= n; ++k) {
        std::vector<double> q{i * step, k * step, 1.0 - (i + k) * step};
        best = std::min(best, dual_objective(w, d, beta, q));
      }
    }
  }
  return best;
}

// Exhaustive grid search over full channels (rows on the grid simplex).
// Feasible for 2 actions and up to 3 source atoms.
inline double grid_min_lagrangian_2a(const std::vector<double>& w,
                                     const std::vector<std::vector<double>>& d, double beta,
                                     double step) {
  std::size_t zn = w.size();
  int n = static_cast<int>(std::lround(1.0 / step));
  std::vector<int> idx(zn, 0);
  std::vector<std::vector<double>> rows(zn, std::vector<double>(2, 0.0));
  double best = std::numeric_limits<double>::infinity();
  while (true) {
    for (std::size_t z = 0; z < zn; ++z) {
      rows[z][0] = idx[z] * step;
      rows[z][1] = 1.0 - rows[z][0];
    }
    best = std::min(best, lagrangian(w, d, beta, rows));
    std::size_t z = 0;
    while (z < zn && ++idx[z] > n) idx[z++] = 0;
    if (z == zn) break;
  }
  return best;
}

// Bellman backup written independently of the library.
inline std::vector<double> bellman(const clrl::TabularMDP& m, const clrl::Matrix& pi_step,
                                   const std::vector<double>& v) {
  std::vector<double> out(m.n_states, 0.0);
  for (std::size_t s = 0; s < m.n_states; ++s) {
    double total = 0.0;
    for (std::size_t a = 0; a < m.n_actions; ++a) {
      double q = m.reward.at(s, a);
      for (std::size_t s2 = 0; s2 < m.n_states; ++s2) {
        q += m.transition.at(s * m.n_actions + a, s2) * v[s2];
      }
      total += pi_step.at(s, a) * q;
    }
    out[s] = total;
  }
  return out;
}

// Brute-force value-equivalence distortion over explicit policy/value sets.
inline double ve_distortion(const clrl::TabularMDP& m, const clrl::TabularMDP& mhat,
                            const std::vector<clrl::Matrix>& policies,
                            const std::vector<std::vector<double>>& values) {
  double worst = 0.0;
  for (const auto& pi : policies) {
    for (const auto& v : values) {
      auto b1 = bellman(m, pi, v);
      auto b2 = bellman(mhat, pi, v);
      for (std::size_t s = 0; s < m.n_states; ++s) {
        worst = std::max(worst, std::abs(b1[s] - b2[s]));
      }
    }
  }
  return worst * worst;
}

// Kolmogorov-Smirnov statistic of samples against U[0,1].
inline double ks_uniform(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  double n = static_cast<double>(xs.size());
  double stat = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double lo = static_cast<double>(i) / n;
    double hi = static_cast<double>(i + 1) / n;
    stat = std::max(stat, std::max(std::abs(xs[i] - lo), std::abs(xs[i] - hi)));
  }
  return stat;
}

// Spearman rank correlation of xs against the time index 0..n-1.
inline double spearman_vs_time(const std::vector<double>& xs) {
  std::size_t n = xs.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  // Average ranks over ties.
  std::vector<double> rank(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t k = i;
    while (k + 1 < n && xs[order[k + 1]] == xs[order[i]]) ++k;
    double r = 0.5 * static_cast<double>(i + k);
    for (std::size_t t = i; t <= k; ++t) rank[order[t]] = r;
    i = k + 1;
  }
  double mean_r = 0.5 * static_cast<double>(n - 1);
  double num = 0.0, dx = 0.0, dy = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    double a = rank[t] - mean_r;
    double b = static_cast<double>(t) - mean_r;
    num += a * b;
    dx += a * a;
    dy += b * b;
  }
  if (dx == 0.0 || dy == 0.0) return 0.0;
  return num / std::sqrt(dx * dy);
}

// Posterior mean/variance of a Gaussian mean with known unit noise, computed
// by brute-force grid integration against the prior N(mu0, var0).
struct GridPosterior {
  double mean = 0.0;
  double var = 0.0;
};

inline GridPosterior gaussian_grid_posterior(double mu0, double var0,
                                             const std::vector<double>& rewards) {
  int n = 40000;
  double lo = mu0 - 10.0 * std::sqrt(var0) - 10.0;
  double hi = mu0 + 10.0 * std::sqrt(var0) + 10.0;
  double h = (hi - lo) / n;
  std::vector<double> logp(n + 1);
  for (int i = 0; i <= n; ++i) {
    double mu = lo + i * h;
    double lp = -(mu - mu0) * (mu - mu0) / (2.0 * var0);
    for (double r : rewards) lp -= (r - mu) * (r - mu) / 2.0;
    logp[i] = lp;
  }
  double mx = *std::max_element(logp.begin(), logp.end());
  double z = 0.0, m1 = 0.0, m2 = 0.0;
  for (int i = 0; i <= n; ++i) {
    double mu = lo + i * h;
    double p = std::exp(logp[i] - mx);
    z += p;
    m1 += p * mu;
    m2 += p * mu * mu;
  }
  GridPosterior out;
  out.mean = m1 / z;
  out.var = m2 / z - out.mean * out.mean;
  return out;
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace oracle
