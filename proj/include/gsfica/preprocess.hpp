#pragma once

#include <Eigen/Dense>
#include <optional>

namespace gsfica {

enum class Centering { Empirical, Exact, None };

struct StandardizedData {
  Eigen::MatrixXd X;        // d x N standardized observations
  Eigen::MatrixXd C_hat;    // covariance actually used
  Eigen::VectorXd mean_used;
  Centering mode = Centering::Empirical;
};

// Symmetric inverse square root via eigendecomposition: returns S with
// S*M*S = I. Throws IllConditionedCovarianceError when an eigenvalue falls
// below eps_floor_rel times the largest.
Eigen::MatrixXd inv_sqrt_sym(const Eigen::MatrixXd& M,
                             double eps_floor_rel = 1e-12);

// Center (per mode) and whiten Y (d x N, rows = channels). Covariance uses
// the 1/N normalization so asymptotic constants are exact. Exact mode
// requires the true mean.
StandardizedData standardize(
    const Eigen::MatrixXd& Y, Centering mode,
    const std::optional<Eigen::VectorXd>& exact_mean = std::nullopt);

}  // namespace gsfica
