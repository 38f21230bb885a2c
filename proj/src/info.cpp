#include "clrl/info.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace clrl {

namespace {

void check_and_normalize(std::vector<double>& probs, const char* what) {
  if (probs.empty()) {
    throw ValidationError(std::string(what) + ": empty support");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    double v = probs[i];
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw ValidationError(std::string(what) + ": entry " + std::to_string(i) +
                            " is negative or non-finite");
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > DiscreteDist::kProbTolerance) {
    throw ValidationError(std::string(what) + ": mass sums to " + std::to_string(sum) +
                          ", outside tolerance of 1");
  }
  for (double& v : probs) v /= sum;
}

}  // namespace

DiscreteDist::DiscreteDist(std::vector<double> probs) : probs_(std::move(probs)) {
  check_and_normalize(probs_, "DiscreteDist");
}

DiscreteDist DiscreteDist::uniform(std::size_t n) {
  if (n == 0) throw ValidationError("DiscreteDist::uniform: empty support");
  return DiscreteDist(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

DiscreteDist DiscreteDist::point_mass(std::size_t n, std::size_t index) {
  if (index >= n) throw ValidationError("DiscreteDist::point_mass: index out of range");
  std::vector<double> p(n, 0.0);
  p[index] = 1.0;
  return DiscreteDist(std::move(p));
}

JointDist::JointDist(std::size_t rows, std::size_t cols, std::vector<double> probs)
    : JointDist(Matrix(rows, cols, std::move(probs))) {}

JointDist::JointDist(Matrix m) : joint_(std::move(m)) {
  auto& d = joint_.data();
  check_and_normalize(d, "JointDist");
}

DiscreteDist JointDist::marginal_x() const {
  std::vector<double> p(rows(), 0.0);
  for (std::size_t x = 0; x < rows(); ++x) {
    for (std::size_t y = 0; y < cols(); ++y) p[x] += at(x, y);
  }
  return DiscreteDist(std::move(p));
}

DiscreteDist JointDist::marginal_y() const {
  std::vector<double> p(cols(), 0.0);
  for (std::size_t x = 0; x < rows(); ++x) {
    for (std::size_t y = 0; y < cols(); ++y) p[y] += at(x, y);
  }
  return DiscreteDist(std::move(p));
}

double entropy(const DiscreteDist& p) {
  double h = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    double v = p[i];
    if (v > 0.0) h -= v * std::log(v);
  }
  return h;
}

double kl_divergence(const DiscreteDist& p, const DiscreteDist& q) {
  if (p.size() != q.size()) {
    throw ValidationError("kl_divergence: support sizes differ");
  }
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    if (q[i] == 0.0) {
      throw ValidationError("kl_divergence: q has zero mass at index " + std::to_string(i) +
                            " where p is positive");
    }
    d += p[i] * std::log(p[i] / q[i]);
  }
  return d < 0.0 ? 0.0 : d;  // guard against -1e-17 from rounding
}

double mutual_information(const JointDist& j) {
  DiscreteDist px = j.marginal_x();
  DiscreteDist py = j.marginal_y();
  double mi = 0.0;
  for (std::size_t x = 0; x < j.rows(); ++x) {
    for (std::size_t y = 0; y < j.cols(); ++y) {
      double v = j.at(x, y);
      if (v > 0.0) mi += v * std::log(v / (px[x] * py[y]));
    }
  }
  return mi < 0.0 ? 0.0 : mi;
}

}  // namespace clrl
