#include "clrl/rd.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include "clrl/errors.hpp"

namespace clrl {

DistortionMatrix::DistortionMatrix(Matrix m) : d(std::move(m)) { validate(); }

void DistortionMatrix::validate() const {
  if (d.rows() == 0 || d.cols() == 0) {
    throw ValidationError("DistortionMatrix: empty");
  }
  for (double v : d.data()) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw ValidationError("DistortionMatrix: entries must be nonnegative and finite");
    }
  }
}

Channel::Channel(Matrix rows) : delta_(std::move(rows)) {
  if (delta_.rows() == 0 || delta_.cols() == 0) {
    throw ValidationError("Channel: empty");
  }
  for (std::size_t z = 0; z < delta_.rows(); ++z) {
    double sum = 0.0;
    for (std::size_t k = 0; k < delta_.cols(); ++k) {
      double v = delta_.at(z, k);
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw ValidationError("Channel: row " + std::to_string(z) +
                              " has a negative or non-finite entry");
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > DiscreteDist::kProbTolerance) {
      throw ValidationError("Channel: row " + std::to_string(z) + " sums to " +
                            std::to_string(sum));
    }
    for (std::size_t k = 0; k < delta_.cols(); ++k) delta_.at(z, k) /= sum;
  }
}

DiscreteDist Channel::row(std::size_t z) const {
  std::vector<double> r(delta_.row(z), delta_.row(z) + delta_.cols());
  return DiscreteDist(std::move(r));
}

namespace {

void check_shapes(const EmpiricalSource& src, const DistortionMatrix& d) {
  if (src.size() != d.sources()) {
    throw ValidationError("rd: source size " + std::to_string(src.size()) +
                          " does not match distortion rows " + std::to_string(d.sources()));
  }
}

double rate_of(const EmpiricalSource& src, const Matrix& delta) {
  const std::size_t zn = delta.rows(), kn = delta.cols();
  std::vector<double> q(kn, 0.0);
  for (std::size_t z = 0; z < zn; ++z) {
    double w = src.weights[z];
    for (std::size_t k = 0; k < kn; ++k) q[k] += w * delta.at(z, k);
  }
  double mi = 0.0;
  for (std::size_t z = 0; z < zn; ++z) {
    double w = src.weights[z];
    if (w == 0.0) continue;
    for (std::size_t k = 0; k < kn; ++k) {
      double v = delta.at(z, k);
      // q[k] >= w*v mathematically, but it can underflow to zero when every
      // contribution is denormal; such terms carry < 1e-300 nats.
      if (v > 0.0 && q[k] > 0.0) mi += w * v * std::log(v / q[k]);
    }
  }
  return mi < 0.0 ? 0.0 : mi;
}

double distortion_of(const EmpiricalSource& src, const Matrix& delta, const DistortionMatrix& d) {
  double out = 0.0;
  for (std::size_t z = 0; z < delta.rows(); ++z) {
    double w = src.weights[z];
    if (w == 0.0) continue;
    double row = 0.0;
    for (std::size_t k = 0; k < delta.cols(); ++k) row += delta.at(z, k) * d.d.at(z, k);
    out += w * row;
  }
  return out;
}

}  // namespace

BaResult blahut_arimoto(const EmpiricalSource& src, const DistortionMatrix& d, double beta,
                        const BaOptions& opts) {
  check_shapes(src, d);
  if (!(beta >= 0.0) || !std::isfinite(beta)) {
    throw ValidationError("blahut_arimoto: beta must be finite and nonnegative");
  }
  if (opts.max_iters < 1) {
    throw ValidationError("blahut_arimoto: max_iters must be positive");
  }
  const std::size_t zn = d.sources(), kn = d.outputs();
  const double neg_inf = -std::numeric_limits<double>::infinity();

  Matrix delta(zn, kn, 1.0 / static_cast<double>(kn));
  std::vector<double> log_q(kn, -std::log(static_cast<double>(kn)));
  double prev_rate = rate_of(src, delta);
  int iters = 0;

  for (int it = 1; it <= opts.max_iters; ++it) {
    // Row update: delta(k|z) ~ q(k) exp(-beta d(z,k)), done in log space so
    // large beta*d cannot overflow.
    for (std::size_t z = 0; z < zn; ++z) {
      double m = neg_inf;
      for (std::size_t k = 0; k < kn; ++k) {
        double l = log_q[k] - beta * d.d.at(z, k);
        delta.at(z, k) = l;
        if (l > m) m = l;
      }
      double sum = 0.0;
      for (std::size_t k = 0; k < kn; ++k) {
        double v = delta.at(z, k) == neg_inf ? 0.0 : std::exp(delta.at(z, k) - m);
        delta.at(z, k) = v;
        sum += v;
      }
      for (std::size_t k = 0; k < kn; ++k) delta.at(z, k) /= sum;
    }
    // Marginal update.
    std::vector<double> q(kn, 0.0);
    for (std::size_t z = 0; z < zn; ++z) {
      double w = src.weights[z];
      for (std::size_t k = 0; k < kn; ++k) q[k] += w * delta.at(z, k);
    }
    for (std::size_t k = 0; k < kn; ++k) log_q[k] = q[k] > 0.0 ? std::log(q[k]) : neg_inf;

    double rate = rate_of(src, delta);
    iters = it;
    if (opts.trace) {
      opts.trace->push_back({beta, rate, distortion_of(src, delta, d), it});
    }
    if (std::abs(rate - prev_rate) < opts.tol) break;
    prev_rate = rate;
  }

  BaResult res{Channel(std::move(delta)), 0.0, 0.0, iters};
  res.rate_nats = rate_of(src, res.channel.matrix());
  res.distortion = distortion_of(src, res.channel.matrix(), d);
  return res;
}

double channel_rate(const EmpiricalSource& src, const Channel& ch) {
  if (src.size() != ch.sources()) {
    throw ValidationError("channel_rate: source size does not match channel rows");
  }
  return rate_of(src, ch.matrix());
}

double channel_distortion(const EmpiricalSource& src, const Channel& ch,
                          const DistortionMatrix& d) {
  check_shapes(src, d);
  if (ch.sources() != d.sources() || ch.outputs() != d.outputs()) {
    throw ValidationError("channel_distortion: channel and distortion shapes differ");
  }
  return distortion_of(src, ch.matrix(), d);
}

DiscreteDist marginal_output_distribution(const EmpiricalSource& src, const Channel& ch) {
  if (src.size() != ch.sources()) {
    throw ValidationError("marginal_output_distribution: shape mismatch");
  }
  std::vector<double> q(ch.outputs(), 0.0);
  for (std::size_t z = 0; z < ch.sources(); ++z) {
    double w = src.weights[z];
    for (std::size_t k = 0; k < ch.outputs(); ++k) q[k] += w * ch.at(z, k);
  }
  return DiscreteDist(std::move(q));
}

Channel min_distortion_channel(const DistortionMatrix& d) {
  d.validate();
  Matrix delta(d.sources(), d.outputs(), 0.0);
  for (std::size_t z = 0; z < d.sources(); ++z) {
    double best = d.d.at(z, 0);
    for (std::size_t k = 1; k < d.outputs(); ++k) best = std::min(best, d.d.at(z, k));
    std::size_t ties = 0;
    for (std::size_t k = 0; k < d.outputs(); ++k) {
      if (d.d.at(z, k) == best) ++ties;
    }
    for (std::size_t k = 0; k < d.outputs(); ++k) {
      if (d.d.at(z, k) == best) delta.at(z, k) = 1.0 / static_cast<double>(ties);
    }
  }
  return Channel(std::move(delta));
}

std::vector<RateDistortionPoint> rd_curve(const EmpiricalSource& src, const DistortionMatrix& d,
                                          const std::vector<double>& beta_grid,
                                          const BaOptions& opts) {
  if (beta_grid.empty()) throw ValidationError("rd_curve: empty beta grid");
  for (std::size_t i = 1; i < beta_grid.size(); ++i) {
    if (beta_grid[i] < beta_grid[i - 1]) {
      throw ValidationError("rd_curve: beta grid must be non-decreasing");
    }
  }
  std::vector<RateDistortionPoint> curve;
  curve.reserve(beta_grid.size());
  for (double beta : beta_grid) {
    BaResult r = blahut_arimoto(src, d, beta, opts);
    curve.push_back({beta, r.rate_nats, r.distortion, r.iters});
  }
  return curve;
}

void write_rd_curve_csv(std::ostream& os, const std::vector<RateDistortionPoint>& curve) {
  os << "beta,rate_nats,distortion,iters\n";
  char buf[128];
  for (const auto& p : curve) {
    std::snprintf(buf, sizeof(buf), "%.12g,%.12g,%.12g,%d\n", p.beta, p.rate_nats, p.distortion,
                  p.iters);
    os << buf;
  }
}

}  // namespace clrl
