#pragma once

#include <cstddef>
#include <ostream>
#include <vector>

#include "clrl/info.hpp"
#include "clrl/matrix.hpp"

namespace clrl {

// Weights over Z source samples. The samples themselves are opaque to the
// solver; callers keep them in a parallel array and reference them by index.
struct EmpiricalSource {
  DiscreteDist weights;

  static EmpiricalSource uniform(std::size_t z) { return {DiscreteDist::uniform(z)}; }
  std::size_t size() const { return weights.size(); }
};

// Z x K matrix of nonnegative finite distortions d(z, k).
struct DistortionMatrix {
  Matrix d;

  DistortionMatrix(std::size_t z, std::size_t k) : d(z, k) {}
  explicit DistortionMatrix(Matrix m);
  std::size_t sources() const { return d.rows(); }
  std::size_t outputs() const { return d.cols(); }
  void validate() const;
};

// Row-stochastic Z x K conditional distribution delta(k | z).
class Channel {
 public:
  explicit Channel(Matrix rows);

  std::size_t sources() const { return delta_.rows(); }
  std::size_t outputs() const { return delta_.cols(); }
  double at(std::size_t z, std::size_t k) const { return delta_.at(z, k); }
  const Matrix& matrix() const { return delta_; }

  DiscreteDist row(std::size_t z) const;

 private:
  Matrix delta_;
};

struct RateDistortionPoint {
  double beta = 0.0;
  double rate_nats = 0.0;
  double distortion = 0.0;
  int iters = 0;
};

struct BaOptions {
  int max_iters = 200;
  double tol = 1e-9;  // stop once |rate_k - rate_{k-1}| < tol
  // Optional per-iteration trace of (rate, distortion); used by convergence
  // tests, ignored when null.
  std::vector<RateDistortionPoint>* trace = nullptr;
};

struct BaResult {
  Channel channel;
  double rate_nats = 0.0;
  double distortion = 0.0;
  int iters = 0;
};

// Blahut-Arimoto iteration at inverse temperature beta: alternates the
// marginal update q(k) = sum_z w(z) delta(k|z) with the row update
// delta(k|z) proportional to q(k) exp(-beta d(z,k)), starting from uniform
// rows. beta = 0 returns the zero-rate channel. Throws ValidationError on
// shape mismatch or negative beta.
BaResult blahut_arimoto(const EmpiricalSource& src, const DistortionMatrix& d, double beta,
                        const BaOptions& opts = {});

// Mutual information (nats) between the source and the channel output.
double channel_rate(const EmpiricalSource& src, const Channel& ch);

// Expected distortion of the channel under the source weights.
double channel_distortion(const EmpiricalSource& src, const Channel& ch,
                          const DistortionMatrix& d);

// Output marginal q(k) = sum_z w(z) delta(k|z).
DiscreteDist marginal_output_distribution(const EmpiricalSource& src, const Channel& ch);

// Pure distortion minimization (the beta -> infinity limit): each row is
// uniform over that row's argmin set in d.
Channel min_distortion_channel(const DistortionMatrix& d);

// One converged solve per beta, in grid order.
std::vector<RateDistortionPoint> rd_curve(const EmpiricalSource& src, const DistortionMatrix& d,
                                          const std::vector<double>& beta_grid,
                                          const BaOptions& opts = {});

// Writes "beta,rate_nats,distortion,iters" rows.
void write_rd_curve_csv(std::ostream& os, const std::vector<RateDistortionPoint>& curve);

}  // namespace clrl
