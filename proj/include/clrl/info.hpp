#pragma once

#include <cstddef>
#include <vector>

#include "clrl/errors.hpp"
#include "clrl/matrix.hpp"

namespace clrl {

// A validated finite probability distribution. Entries must be nonnegative
// and sum to 1 within kProbTolerance; sums inside the tolerance band are
// renormalized exactly, anything further off is rejected.
class DiscreteDist {
 public:
  static constexpr double kProbTolerance = 1e-9;

  explicit DiscreteDist(std::vector<double> probs);

  static DiscreteDist uniform(std::size_t n);
  static DiscreteDist point_mass(std::size_t n, std::size_t index);

  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  const std::vector<double>& probs() const { return probs_; }

 private:
  std::vector<double> probs_;
};

// A joint distribution over a finite product space, stored row-major
// (rows index X, columns index Y). Total mass must be 1 within tolerance.
class JointDist {
 public:
  JointDist(std::size_t rows, std::size_t cols, std::vector<double> probs);
  explicit JointDist(Matrix m);

  std::size_t rows() const { return joint_.rows(); }
  std::size_t cols() const { return joint_.cols(); }
  double at(std::size_t x, std::size_t y) const { return joint_.at(x, y); }
  const Matrix& matrix() const { return joint_; }

  DiscreteDist marginal_x() const;
  DiscreteDist marginal_y() const;

 private:
  Matrix joint_;
};

// Shannon entropy in nats. Zero-probability entries contribute zero.
double entropy(const DiscreteDist& p);

// KL divergence KL(p || q) in nats. Throws ValidationError if the supports
// mismatch or if q assigns zero mass where p does not.
double kl_divergence(const DiscreteDist& p, const DiscreteDist& q);

// Mutual information of a joint distribution in nats, computed as
// KL(joint || product of marginals).
double mutual_information(const JointDist& j);

}  // namespace clrl
