#pragma once

#include <Eigen/Dense>
#include <vector>

#include "gsfica/nonlinearity.hpp"
#include "gsfica/sources.hpp"

namespace gsfica {

// Per-row expectations under assignment sigma (nonlinearity i paired with
// source sigma(i)):
//   alpha_i = E[g_i'(z) - g_i(z) z],  beta_i = E[g_i(z)^2],
//   gamma_i = E[g_i(z) z],            eta_i  = E[g_i(z)],
//   tau_i   = (E[z^4] - 1) / 4,       z = z_{sigma(i)},
// plus kappa_i = E[score^2] of source sigma(i) (NaN when divergent) and the
// lambda matrix lambda_ij = E[g~_i'(z_{sigma(i)})] - E[g~_j(z_{sigma(j)}) z],
// sign-corrected so that lambda_ij + lambda_ji = |alpha_i| + |alpha_j|.
struct MomentFunctionals {
  Eigen::VectorXd alpha, beta, gamma, eta, tau, kappa;
  Eigen::VectorXd third;  // E[z^3] of source sigma(i), for exact centering
  Eigen::MatrixXd lambda;
};

using Permutation = std::vector<int>;  // sigma(i) = sigma[i], 0-based

MomentFunctionals moment_functionals(const std::vector<SourceSpec>& specs,
                                     const NonlinearityList& nls,
                                     const Permutation& sigma);

// sign(alpha_i) per row; throws DegeneratePairingError when |alpha_i| <= 1e-9.
Eigen::VectorXd local_contrast_signs(const MomentFunctionals& f);

enum class Variant {
  GeneralizedEmpiricalCentering,  // the new closed form
  ExactCentering,                 // known E[y]
  SymmetricLegacy,                // symmetric-distribution-only legacy formula
  OneUnit,                        // deflationary, first extraction
};

// Asymptotic covariance of sqrt(N)(b_hat_i - b_i), empirical centering.
Eigen::MatrixXd cov_generalized(const MomentFunctionals& f,
                                const Eigen::MatrixXd& B, int i);

// Exact-centering counterpart with the eta outer product and the
// E[z^3] E[g_j] cross terms.
Eigen::MatrixXd cov_exact_centering(const MomentFunctionals& f,
                                    const Eigen::MatrixXd& B, int i);

// Deflationary one-unit covariance for the i-th sequentially extracted source.
Eigen::MatrixXd cov_oneunit_deflation(const MomentFunctionals& f,
                                      const Eigen::MatrixXd& B, int i);

// (beta_i - gamma_i^2) / alpha_i^2: the covariance trace up to a
// mixing-dependent constant; only ratios across nonlinearities are meaningful.
double trace_oneunit(const MomentFunctionals& f, int i);

// Scalar variance of sqrt(N)(G_hat_{i,sigma(j)} - G_{i,sigma(j)}).
// The diagonal (j == i) is tau_i for every variant.
double gain_variance(const MomentFunctionals& f, Variant variant, int i, int j);

// kappa_j / (kappa_i kappa_j - 1). Throws NonIdentifiableError when
// kappa_i * kappa_j <= 1 (two Gaussian sources).
double crb_gain(double kappa_i, double kappa_j);

struct CrbAttainment {
  MomentFunctionals functionals;  // under the optimal assignment for target i
  Eigen::VectorXd V;    // V_{i,j}, j != i, from the generalized formula
  Eigen::VectorXd crb;  // CRB(V_{i,j})
  double max_rel_gap = 0.0;
};

// Builds g_i = score(spec_i), g_j = score(spec_j)/kappa_j, evaluates the
// gain variances and compares them with the CRB. Intermediate identities
// (beta_i = kappa_i, gamma_i = 1, alpha_i = kappa_i - 1, eta = 0) hold for
// the sign-corrected functionals and are exposed through `functionals`.
CrbAttainment crb_attainment_check(const std::vector<SourceSpec>& specs, int i);

// Stacked empirical estimating-equation residual at (B_hat, mu_hat):
// d mean residuals, d(d+1)/2 whitening residuals, d(d-1)/2 antisymmetry
// residuals with sign-corrected g~.
Eigen::VectorXd estimating_residual(const Eigen::MatrixXd& B_hat,
                                    const Eigen::VectorXd& mu_hat,
                                    const Eigen::MatrixXd& Y,
                                    const NonlinearityList& nls,
                                    const Eigen::VectorXd& signs);

}  // namespace gsfica
