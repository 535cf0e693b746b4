#include "gsfica/preprocess.hpp"

#include "gsfica/errors.hpp"

namespace gsfica {

Eigen::MatrixXd inv_sqrt_sym(const Eigen::MatrixXd& M, double eps_floor_rel) {
  if (M.rows() != M.cols()) {
    throw ParameterError("inv_sqrt_sym: matrix must be square");
  }
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-10 * (1.0 + M.cwiseAbs().maxCoeff())) {
    throw ParameterError("inv_sqrt_sym: matrix is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(M);
  const Eigen::VectorXd& lambda = eig.eigenvalues();
  const double floor = eps_floor_rel * lambda.cwiseAbs().maxCoeff();
  if (lambda.minCoeff() <= floor) {
    throw IllConditionedCovarianceError(
        "inv_sqrt_sym: eigenvalue below floor (rank-deficient covariance?)");
  }
  return eig.eigenvectors() *
         lambda.cwiseSqrt().cwiseInverse().asDiagonal() *
         eig.eigenvectors().transpose();
}

StandardizedData standardize(const Eigen::MatrixXd& Y, Centering mode,
                             const std::optional<Eigen::VectorXd>& exact_mean) {
  const Eigen::Index d = Y.rows();
  const Eigen::Index n = Y.cols();
  if (n <= d) {
    throw InsufficientSampleError("standardize: need N > d samples");
  }

  Eigen::VectorXd mu = Eigen::VectorXd::Zero(d);
  switch (mode) {
    case Centering::Empirical:
      mu = Y.rowwise().mean();
      break;
    case Centering::Exact:
      if (!exact_mean) {
        throw ParameterError("standardize: exact centering needs the true mean");
      }
      mu = *exact_mean;
      break;
    case Centering::None:
      break;
  }

  StandardizedData out;
  out.mode = mode;
  out.mean_used = mu;
  Eigen::MatrixXd centered = Y.colwise() - mu;
  out.C_hat = (centered * centered.transpose()) / static_cast<double>(n);
  out.X = inv_sqrt_sym(out.C_hat) * centered;
  return out;
}

}  // namespace gsfica
