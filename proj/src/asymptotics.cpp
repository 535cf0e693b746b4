#include "gsfica/asymptotics.hpp"

#include <cmath>
#include <limits>

#include "gsfica/errors.hpp"
#include "gsfica/quadrature.hpp"

namespace gsfica {

namespace {

double expect(const SourceSpec& spec, const std::function<double(double)>& h) {
  const auto [lo, hi] = spec.support();
  return quadrature::integrate_split(
      [&](double z) { return h(z) * spec.pdf(z); }, lo, hi);
}

void check_index(const MomentFunctionals& f, int i) {
  if (i < 0 || i >= f.alpha.size()) {
    throw ParameterError("asymptotics: row index out of range");
  }
}

double offdiag_denominator(const MomentFunctionals& f, int i, int j) {
  const double den = std::abs(f.alpha[i]) + std::abs(f.alpha[j]);
  if (den <= 1e-9) {
    throw DegeneratePairingError(
        "asymptotics: |alpha_i| + |alpha_j| ~ 0 for rows " +
        std::to_string(i) + ", " + std::to_string(j));
  }
  return den;
}

}  // namespace

MomentFunctionals moment_functionals(const std::vector<SourceSpec>& specs,
                                     const NonlinearityList& nls,
                                     const Permutation& sigma) {
  const int d = static_cast<int>(nls.size());
  if (static_cast<int>(sigma.size()) != d) {
    throw ParameterError("moment_functionals: sigma size mismatch");
  }
  MomentFunctionals f;
  f.alpha.resize(d);
  f.beta.resize(d);
  f.gamma.resize(d);
  f.eta.resize(d);
  f.tau.resize(d);
  f.kappa.resize(d);
  f.third.resize(d);
  Eigen::VectorXd e_gp(d);  // E[g_i'(z_{sigma(i)})]
  for (int i = 0; i < d; ++i) {
    const int si = sigma[static_cast<std::size_t>(i)];
    if (si < 0 || si >= static_cast<int>(specs.size())) {
      throw ParameterError("moment_functionals: sigma entry out of range");
    }
    const SourceSpec& src = specs[static_cast<std::size_t>(si)];
    const Nonlinearity& nl = nls[static_cast<std::size_t>(i)];
    // E[g'] uses the distributional derivative: a score kernel with a kink
    // contributes jump * pdf(0) on top of the pointwise integral.
    e_gp[i] = expect(src, [&](double z) { return nl.gprime(z); }) +
              nl.g_jump() * src.pdf(0.0);
    f.gamma[i] = expect(src, [&](double z) { return nl.g(z) * z; });
    f.alpha[i] = e_gp[i] - f.gamma[i];
    f.beta[i] = expect(src, [&](double z) { const double v = nl.g(z); return v * v; });
    f.eta[i] = expect(src, [&](double z) { return nl.g(z); });
    f.tau[i] = (src.moment(4) - 1.0) / 4.0;
    f.third[i] = src.moment(3);
    f.kappa[i] = src.has_finite_fisher()
                     ? src.fisher_kappa()
                     : std::numeric_limits<double>::quiet_NaN();
  }
  // lambda_ij = E[g~_i'] - E[g~_j z]; sign correction via sign(alpha).
  f.lambda.resize(d, d);
  for (int i = 0; i < d; ++i) {
    const double si = f.alpha[i] >= 0.0 ? 1.0 : -1.0;
    for (int j = 0; j < d; ++j) {
      const double sj = f.alpha[j] >= 0.0 ? 1.0 : -1.0;
      f.lambda(i, j) = si * e_gp[i] - sj * f.gamma[j];
    }
  }
  return f;
}

Eigen::VectorXd local_contrast_signs(const MomentFunctionals& f) {
  Eigen::VectorXd signs(f.alpha.size());
  for (Eigen::Index i = 0; i < f.alpha.size(); ++i) {
    if (std::abs(f.alpha[i]) <= 1e-9) {
      throw DegeneratePairingError(
          "local_contrast_signs: alpha ~ 0 for row " + std::to_string(i) +
          " (nonlinearity degenerate for its source)");
    }
    signs[i] = f.alpha[i] > 0.0 ? 1.0 : -1.0;
  }
  return signs;
}

Eigen::MatrixXd cov_generalized(const MomentFunctionals& f,
                                const Eigen::MatrixXd& B, int i) {
  check_index(f, i);
  const int d = static_cast<int>(f.alpha.size());
  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(d, d);
  for (int j = 0; j < d; ++j) {
    if (j == i) continue;
    const double den = offdiag_denominator(f, i, j);
    const double num = f.beta[i] - f.gamma[i] * f.gamma[i] + f.beta[j] -
                       f.gamma[j] * f.gamma[j] + f.alpha[j] * f.alpha[j] -
                       f.eta[i] * f.eta[i] - f.eta[j] * f.eta[j];
    R += (num / (den * den)) * B.row(j).transpose() * B.row(j);
  }
  R += f.tau[i] * B.row(i).transpose() * B.row(i);
  return R;
}

Eigen::MatrixXd cov_exact_centering(const MomentFunctionals& f,
                                    const Eigen::MatrixXd& B, int i) {
  check_index(f, i);
  const int d = static_cast<int>(f.alpha.size());
  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(d, d);
  Eigen::VectorXd eta_mix = Eigen::VectorXd::Zero(B.cols());
  for (int j = 0; j < d; ++j) {
    if (j == i) continue;
    const double den = offdiag_denominator(f, i, j);
    const double num = f.beta[i] - f.gamma[i] * f.gamma[i] + f.beta[j] -
                       f.gamma[j] * f.gamma[j] + f.alpha[j] * f.alpha[j] -
                       f.eta[j] * f.eta[j];
    R += (num / (den * den)) * B.row(j).transpose() * B.row(j);
    eta_mix += (f.eta[j] / den) * B.row(j).transpose();
    // cross term: E[z_i^3] E[g_j(z_j)] / (2 (|a_i|+|a_j|)) (b_j b_i^T + ...)
    const double cross = f.third[i] * f.eta[j] / (2.0 * den);
    R -= cross * (B.row(j).transpose() * B.row(i) +
                  B.row(i).transpose() * B.row(j));
  }
  R += f.tau[i] * B.row(i).transpose() * B.row(i);
  R += eta_mix * eta_mix.transpose();
  return R;
}

Eigen::MatrixXd cov_oneunit_deflation(const MomentFunctionals& f,
                                      const Eigen::MatrixXd& B, int i) {
  check_index(f, i);
  const int d = static_cast<int>(f.alpha.size());
  for (int j = 0; j <= i; ++j) {
    if (std::abs(f.alpha[j]) <= 1e-9) {
      throw DegeneratePairingError(
          "cov_oneunit_deflation: alpha ~ 0 for row " + std::to_string(j));
    }
  }
  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(d, d);
  for (int j = 0; j < i; ++j) {  // sources extracted before i
    const double num = f.beta[j] - f.gamma[j] * f.gamma[j] -
                       f.eta[j] * f.eta[j] + f.alpha[j] * f.alpha[j];
    R += (num / (f.alpha[j] * f.alpha[j])) * B.row(j).transpose() * B.row(j);
  }
  R += f.tau[i] * B.row(i).transpose() * B.row(i);
  const double tail = (f.beta[i] - f.gamma[i] * f.gamma[i] -
                       f.eta[i] * f.eta[i]) /
                      (f.alpha[i] * f.alpha[i]);
  for (int j = i + 1; j < d; ++j) {
    R += tail * B.row(j).transpose() * B.row(j);
  }
  return R;
}

double trace_oneunit(const MomentFunctionals& f, int i) {
  check_index(f, i);
  if (std::abs(f.alpha[i]) <= 1e-9) {
    throw DegeneratePairingError("trace_oneunit: alpha ~ 0");
  }
  return (f.beta[i] - f.gamma[i] * f.gamma[i]) / (f.alpha[i] * f.alpha[i]);
}

double gain_variance(const MomentFunctionals& f, Variant variant, int i,
                     int j) {
  check_index(f, i);
  check_index(f, j);
  if (i == j) return f.tau[i];
  switch (variant) {
    case Variant::GeneralizedEmpiricalCentering: {
      const double den = offdiag_denominator(f, i, j);
      return (f.beta[i] - f.gamma[i] * f.gamma[i] + f.beta[j] -
              f.gamma[j] * f.gamma[j] + f.alpha[j] * f.alpha[j] -
              f.eta[i] * f.eta[i] - f.eta[j] * f.eta[j]) /
             (den * den);
    }
    case Variant::ExactCentering:
    case Variant::SymmetricLegacy: {
      const double den = offdiag_denominator(f, i, j);
      return (f.beta[i] - f.gamma[i] * f.gamma[i] + f.beta[j] -
              f.gamma[j] * f.gamma[j] + f.alpha[j] * f.alpha[j]) /
             (den * den);
    }
    case Variant::OneUnit: {
      if (std::abs(f.alpha[i]) <= 1e-9) {
        throw DegeneratePairingError("gain_variance: alpha ~ 0");
      }
      return (f.beta[i] - f.gamma[i] * f.gamma[i]) /
             (f.alpha[i] * f.alpha[i]);
    }
  }
  throw ParameterError("gain_variance: unknown variant");
}

double crb_gain(double kappa_i, double kappa_j) {
  if (!(std::isfinite(kappa_i) && std::isfinite(kappa_j))) {
    throw NumericError("crb_gain: kappa not available");
  }
  const double det = kappa_i * kappa_j - 1.0;
  if (det <= 1e-12) {
    throw NonIdentifiableError(
        "crb_gain: kappa_i * kappa_j <= 1 (source pair not identifiable)");
  }
  return kappa_j / det;
}

CrbAttainment crb_attainment_check(const std::vector<SourceSpec>& specs,
                                  int i) {
  const int d = static_cast<int>(specs.size());
  if (i < 0 || i >= d) throw ParameterError("crb_attainment_check: bad index");
  NonlinearityList nls;
  nls.reserve(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) {
    const SourceSpec& s = specs[static_cast<std::size_t>(j)];
    nls.push_back(j == i ? Nonlinearity::score(s)
                         : Nonlinearity::scaled_score(s));
  }
  Permutation sigma(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) sigma[static_cast<std::size_t>(j)] = j;

  CrbAttainment out;
  out.functionals = moment_functionals(specs, nls, sigma);
  // Report the functionals of the sign-corrected g~ = sign(alpha) g, under
  // which the attainment identities beta = kappa, gamma = 1, alpha = kappa - 1,
  // eta = 0 hold. The variances below only use sign-insensitive combinations.
  for (int j = 0; j < d; ++j) {
    if (out.functionals.alpha[j] < 0.0) {
      out.functionals.alpha[j] = -out.functionals.alpha[j];
      out.functionals.gamma[j] = -out.functionals.gamma[j];
      out.functionals.eta[j] = -out.functionals.eta[j];
    }
  }
  out.V.resize(d);
  out.crb.resize(d);
  for (int j = 0; j < d; ++j) {
    if (j == i) {
      out.V[j] = out.crb[j] = 0.0;
      continue;
    }
    out.V[j] = gain_variance(out.functionals,
                             Variant::GeneralizedEmpiricalCentering, i, j);
    out.crb[j] = crb_gain(out.functionals.kappa[i], out.functionals.kappa[j]);
    out.max_rel_gap = std::max(
        out.max_rel_gap, std::abs(out.V[j] - out.crb[j]) / out.crb[j]);
  }
  return out;
}

Eigen::VectorXd estimating_residual(const Eigen::MatrixXd& B_hat,
                                    const Eigen::VectorXd& mu_hat,
                                    const Eigen::MatrixXd& Y,
                                    const NonlinearityList& nls,
                                    const Eigen::VectorXd& signs) {
  const Eigen::Index d = Y.rows();
  const Eigen::Index n = Y.cols();
  if (B_hat.rows() != d || B_hat.cols() != d || mu_hat.size() != d ||
      static_cast<Eigen::Index>(nls.size()) != d || signs.size() != d) {
    throw ParameterError("estimating_residual: dimension mismatch");
  }
  const Eigen::MatrixXd centered = Y.colwise() - mu_hat;
  const Eigen::MatrixXd U = B_hat * centered;  // row i = b_i^T (y - mu)
  Eigen::MatrixXd Gt(d, n);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index t = 0; t < n; ++t) {
      Gt(i, t) = signs[i] * nls[static_cast<std::size_t>(i)].g(U(i, t));
    }
  }
  Eigen::VectorXd res(d + d * (d + 1) / 2 + d * (d - 1) / 2);
  Eigen::Index pos = 0;
  // mean block
  res.segment(0, d) = Y.rowwise().mean() - mu_hat;
  pos += d;
  // whitening block, i <= j
  const Eigen::MatrixXd S = U * U.transpose() / static_cast<double>(n);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i; j < d; ++j) {
      res[pos++] = S(i, j) - (i == j ? 1.0 : 0.0);
    }
  }
  // antisymmetry block, i < j
  const Eigen::MatrixXd M = Gt * U.transpose() / static_cast<double>(n);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i + 1; j < d; ++j) {
      res[pos++] = M(i, j) - M(j, i);
    }
  }
  return res;
}

}  // namespace gsfica
