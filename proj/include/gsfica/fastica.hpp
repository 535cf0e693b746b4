#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "gsfica/nonlinearity.hpp"
#include "gsfica/preprocess.hpp"
#include "gsfica/sources.hpp"

namespace gsfica {

struct IterationConfig {
  double tol = 1e-9;
  int max_iter = 1000;
  NonlinearityList nls;
  Eigen::MatrixXd W0;  // re-orthonormalized on entry
};

struct SeparationResult {
  Eigen::MatrixXd W;  // orthogonal estimate on the whitened model
  Eigen::MatrixXd B;  // W * C_hat^{-1/2}
  int iterations = 0;
  bool converged = false;
  double final_delta = 0.0;
  Eigen::VectorXd sign_vector;  // Lambda detected at convergence
  std::string diagnostic;       // nonempty on failure (e.g. degenerate pairing)
  // Rows whose empirical alpha = E_N[g'(u) - g(u)u] is statistically
  // indistinguishable from zero (within one standard error). Such a pairing
  // has no usable contrast; results for these rows are noise.
  std::vector<int> degenerate_rows;
};

// H_hat(W): row i = E_N[g_i'(w_i^T x)] w_i^T - E_N[g_i(w_i^T x) x^T]
Eigen::MatrixXd empirical_H(const Eigen::MatrixXd& W, const Eigen::MatrixXd& X,
                            const NonlinearityList& nls);

// Orthogonal polar factor (M M^T)^{-1/2} M. Throws DegeneratePairingError on
// rank deficiency.
Eigen::MatrixXd symmetric_orthogonalize(const Eigen::MatrixXd& M);

// Parallel fixed-point iteration W <- F_hat(W) with per-row nonlinearities.
// Non-convergence is reported in the result, not thrown.
SeparationResult generalized_symmetric(const StandardizedData& data,
                                       const IterationConfig& cfg);

// Ordinary symmetric FastICA: generalized variant with one shared nonlinearity.
SeparationResult symmetric(const StandardizedData& data, const Nonlinearity& nl,
                           const Eigen::MatrixXd& W0, double tol = 1e-9,
                           int max_iter = 1000);

// Deflationary one-unit FastICA; rows extracted sequentially with Gram-Schmidt
// deflation against previously found vectors.
SeparationResult one_unit(const StandardizedData& data,
                          const IterationConfig& cfg);

// min over sign matrices L of ||F_hat(W) - L W||_F (closed form).
double fixed_point_residual(const Eigen::MatrixXd& W, const Eigen::MatrixXd& X,
                            const NonlinearityList& nls);

// || M - M^T ||_F for M = E_N[g~(Wx) x^T W^T], g~_i = signs_i * g_i.
double symmetry_defect(const Eigen::MatrixXd& W, const Eigen::MatrixXd& X,
                       const NonlinearityList& nls,
                       const Eigen::VectorXd& signs);

// Sign-corrected local contrast: sum_i signs_i * E_N[G_i(w_i^T x)].
double local_contrast(const Eigen::MatrixXd& W, const Eigen::MatrixXd& X,
                      const NonlinearityList& nls, const Eigen::VectorXd& signs);

// The two-angle orthogonal family used for 3-d contrast surfaces.
Eigen::Matrix3d two_angle_rotation(double phi, double chi);

// Contrast values over a (phi, chi) grid; d must be 3. Pass signs of all +1
// for the uncorrected surface.
Eigen::MatrixXd contrast_surface(const std::vector<double>& phi_grid,
                                 const std::vector<double>& chi_grid,
                                 const Eigen::MatrixXd& X,
                                 const NonlinearityList& nls,
                                 const Eigen::VectorXd& signs);

// Infinite-sample model x = A z with known sources; expectations evaluated by
// 1-d quadrature. Valid at matrices whose rows align with source axes (signed
// permutations of A^T), which is where fixed points live.
struct TheoreticalModel {
  std::vector<SourceSpec> specs;
  Eigen::MatrixXd A;  // orthogonal mixing of the standardized model
};

Eigen::MatrixXd theoretical_H(const Eigen::MatrixXd& W,
                              const TheoreticalModel& model,
                              const NonlinearityList& nls);

SeparationResult theoretical_iterate(const TheoreticalModel& model,
                                     const IterationConfig& cfg);

double theoretical_fixed_point_residual(const Eigen::MatrixXd& W,
                                        const TheoreticalModel& model,
                                        const NonlinearityList& nls);

}  // namespace gsfica
