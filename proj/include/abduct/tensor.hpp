#ifndef ABDUCT_TENSOR_HPP
#define ABDUCT_TENSOR_HPP

// Dense kernels shared by both prediction tracks. Inputs may be stored in
// any floating scalar (the embedding store uses float); every reduction is
// carried out in double.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace abduct {

using Vector = Eigen::VectorXf;
using TokenMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using VectorD = Eigen::VectorXd;

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& x) {
  return x.derived().allFinite();
}

/// Sentence embedding from token encodings: the column-wise mean over rows.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1>
mean_pool(const Eigen::MatrixBase<Derived>& tokens) {
  using Scalar = typename Derived::Scalar;
  if (tokens.rows() == 0 || tokens.cols() == 0) {
    throw std::domain_error("mean_pool: empty token matrix");
  }
  const Eigen::VectorXd sum = tokens.template cast<double>().colwise().sum().transpose();
  return (sum / static_cast<double>(tokens.rows())).template cast<Scalar>();
}

/// Cosine similarity clamped to [-1, 1]. Zero-norm inputs are rejected.
template <typename DerivedU, typename DerivedV>
double cosine(const Eigen::MatrixBase<DerivedU>& u, const Eigen::MatrixBase<DerivedV>& v) {
  if (u.size() != v.size()) {
    throw std::domain_error("cosine: dimension mismatch (" + std::to_string(u.size()) + " vs " +
                            std::to_string(v.size()) + ")");
  }
  const Eigen::VectorXd ud = u.template cast<double>();
  const Eigen::VectorXd vd = v.template cast<double>();
  const double nu2 = ud.squaredNorm();
  const double nv2 = vd.squaredNorm();
  if (!(nu2 > 0.0) || !(nv2 > 0.0)) {
    throw std::domain_error("cosine: zero-norm vector");
  }
  // One square root over the product keeps parallel integer-valued inputs at exactly 1.
  const double c = ud.dot(vd) / std::sqrt(nu2 * nv2);
  return std::clamp(c, -1.0, 1.0);
}

template <typename Derived>
VectorD softmax(const Eigen::MatrixBase<Derived>& logits) {
  if (logits.size() == 0) throw std::domain_error("softmax: empty input");
  const Eigen::VectorXd z = logits.template cast<double>();
  if (!z.allFinite()) throw std::domain_error("softmax: non-finite logit");
  const Eigen::VectorXd e = (z.array() - z.maxCoeff()).exp().matrix();
  return e / e.sum();
}

/// log(sum(exp(z))) with max subtraction.
template <typename Derived>
double log_sum_exp(const Eigen::MatrixBase<Derived>& logits) {
  const Eigen::VectorXd z = logits.template cast<double>();
  const double m = z.maxCoeff();
  return m + std::log((z.array() - m).exp().sum());
}

/// logits = W x + b.
template <typename DerivedW, typename DerivedB, typename DerivedX>
VectorD linear_forward(const Eigen::MatrixBase<DerivedW>& weights,
                       const Eigen::MatrixBase<DerivedB>& bias,
                       const Eigen::MatrixBase<DerivedX>& x) {
  if (weights.cols() != x.size()) {
    throw std::domain_error("linear_forward: input dimension " + std::to_string(x.size()) +
                            " does not match weight columns " + std::to_string(weights.cols()));
  }
  if (bias.size() != weights.rows()) {
    throw std::domain_error("linear_forward: bias size does not match weight rows");
  }
  return weights.template cast<double>() * x.template cast<double>() + bias.template cast<double>();
}

}  // namespace abduct

#endif  // ABDUCT_TENSOR_HPP
