#pragma once

#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "geosteer/rng.hpp"

namespace geosteer {

/// Block-diagonal symmetric positive definite covariance. One block per well
/// position; cross-block covariance is zero. Each block keeps its Cholesky
/// factor so solves, quadratic forms and sampling are cheap.
class BlockDiagCovariance {
 public:
  BlockDiagCovariance() = default;
  explicit BlockDiagCovariance(std::vector<Eigen::MatrixXd> blocks);

  /// A single dense block.
  static BlockDiagCovariance dense(const Eigen::MatrixXd& cov);
  static BlockDiagCovariance diagonal(const Eigen::VectorXd& variances);

  Eigen::Index dim() const { return dim_; }
  std::size_t block_count() const { return blocks_.size(); }
  const Eigen::MatrixXd& block(std::size_t i) const { return blocks_[i]; }
  Eigen::Index block_offset(std::size_t i) const { return offsets_[i]; }

  Eigen::VectorXd diagonal() const;
  Eigen::MatrixXd to_dense() const;

  /// C^{-1} x
  Eigen::VectorXd solve(const Eigen::VectorXd& x) const;
  /// x^T C^{-1} x
  double quad_form(const Eigen::VectorXd& x) const;
  /// One draw from N(0, C).
  Eigen::VectorXd sample(Rng& rng) const;
  /// n draws as columns.
  Eigen::MatrixXd sample(Rng& rng, Eigen::Index n) const;

 private:
  std::vector<Eigen::MatrixXd> blocks_;
  std::vector<Eigen::LLT<Eigen::MatrixXd>> factors_;
  std::vector<Eigen::Index> offsets_;
  Eigen::Index dim_ = 0;
};

}  // namespace geosteer
