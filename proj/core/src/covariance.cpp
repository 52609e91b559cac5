#include "geosteer/covariance.hpp"

#include "geosteer/errors.hpp"

namespace geosteer {

BlockDiagCovariance::BlockDiagCovariance(std::vector<Eigen::MatrixXd> blocks)
    : blocks_(std::move(blocks)) {
  factors_.reserve(blocks_.size());
  offsets_.reserve(blocks_.size());
  for (const auto& b : blocks_) {
    if (b.rows() != b.cols() || b.rows() == 0) {
      throw ShapeError("covariance block must be square and non-empty");
    }
    if (!b.allFinite()) throw NumericError("covariance block has non-finite entries");
    if (!b.isApprox(b.transpose(), 1e-12)) throw InputError("covariance block is not symmetric");
    Eigen::LLT<Eigen::MatrixXd> llt(b);
    if (llt.info() != Eigen::Success) {
      throw InputError("covariance block is not positive definite");
    }
    offsets_.push_back(dim_);
    dim_ += b.rows();
    factors_.push_back(std::move(llt));
  }
}

BlockDiagCovariance BlockDiagCovariance::dense(const Eigen::MatrixXd& cov) {
  return BlockDiagCovariance(std::vector<Eigen::MatrixXd>{cov});
}

BlockDiagCovariance BlockDiagCovariance::diagonal(const Eigen::VectorXd& variances) {
  return dense(variances.asDiagonal().toDenseMatrix());
}

Eigen::VectorXd BlockDiagCovariance::diagonal() const {
  Eigen::VectorXd d(dim_);
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    d.segment(offsets_[i], blocks_[i].rows()) = blocks_[i].diagonal();
  }
  return d;
}

Eigen::MatrixXd BlockDiagCovariance::to_dense() const {
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(dim_, dim_);
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const auto n = blocks_[i].rows();
    c.block(offsets_[i], offsets_[i], n, n) = blocks_[i];
  }
  return c;
}

Eigen::VectorXd BlockDiagCovariance::solve(const Eigen::VectorXd& x) const {
  if (x.size() != dim_) throw ShapeError("covariance solve: dimension mismatch");
  Eigen::VectorXd y(dim_);
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const auto n = blocks_[i].rows();
    y.segment(offsets_[i], n) = factors_[i].solve(x.segment(offsets_[i], n));
  }
  return y;
}

double BlockDiagCovariance::quad_form(const Eigen::VectorXd& x) const {
  if (x.size() != dim_) throw ShapeError("covariance quad_form: dimension mismatch");
  double q = 0.0;
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const auto n = blocks_[i].rows();
    // |L^{-1} x|^2
    const Eigen::VectorXd w = factors_[i].matrixL().solve(x.segment(offsets_[i], n));
    q += w.squaredNorm();
  }
  return q;
}

Eigen::VectorXd BlockDiagCovariance::sample(Rng& rng) const {
  Eigen::VectorXd out(dim_);
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const auto n = blocks_[i].rows();
    const Eigen::VectorXd z = rng.normal_vector(n);
    out.segment(offsets_[i], n) = factors_[i].matrixL() * z;
  }
  return out;
}

Eigen::MatrixXd BlockDiagCovariance::sample(Rng& rng, Eigen::Index n) const {
  Eigen::MatrixXd out(dim_, n);
  for (Eigen::Index j = 0; j < n; ++j) out.col(j) = sample(rng);
  return out;
}

}  // namespace geosteer
