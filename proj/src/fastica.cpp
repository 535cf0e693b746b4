#include "gsfica/fastica.hpp"

#include <cmath>

#include "gsfica/errors.hpp"
#include "gsfica/quadrature.hpp"

namespace gsfica {

namespace {

void check_dims(const Eigen::MatrixXd& W, const Eigen::MatrixXd& X,
                const NonlinearityList& nls) {
  if (W.rows() != W.cols() || W.rows() != X.rows() ||
      static_cast<Eigen::Index>(nls.size()) != W.rows()) {
    throw ParameterError("fastica: dimension mismatch between W, X and nls");
  }
}

Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& W) {
  return symmetric_orthogonalize(W);
}

// 1 - min_i |(W_new W_old^T)_ii|; invariant to the flipping-sign phenomenon.
double convergence_delta(const Eigen::MatrixXd& W_new,
                         const Eigen::MatrixXd& W_old) {
  return 1.0 - (W_new * W_old.transpose()).diagonal().cwiseAbs().minCoeff();
}

std::string degenerate_alpha_diagnostic(const Eigen::MatrixXd& H,
                                        const Eigen::MatrixXd& W) {
  const Eigen::VectorXd diag = (H * W.transpose()).diagonal();
  std::string msg;
  for (Eigen::Index i = 0; i < diag.size(); ++i) {
    if (std::abs(diag[i]) < 1e-6) {
      msg += "nonlinearity degenerate for source (row " + std::to_string(i) +
             ", |alpha| < 1e-6); ";
    }
  }
  return msg;
}

}  // namespace

Eigen::MatrixXd empirical_H(const Eigen::MatrixXd& W, const Eigen::MatrixXd& X,
                            const NonlinearityList& nls) {
  check_dims(W, X, nls);
  const Eigen::Index d = W.rows();
  const Eigen::Index n = X.cols();
  const Eigen::MatrixXd P = W * X;  // row i = w_i^T x(t)
  Eigen::MatrixXd H(d, d);
  Eigen::VectorXd gbuf(n);
  for (Eigen::Index i = 0; i < d; ++i) {
    double mean_gp = 0.0;
    for (Eigen::Index t = 0; t < n; ++t) {
      const double u = P(i, t);
      gbuf[t] = nls[i].g(u);
      mean_gp += nls[i].gprime(u);
    }
    mean_gp /= static_cast<double>(n);
    H.row(i) = mean_gp * W.row(i) -
               (X * gbuf).transpose() / static_cast<double>(n);
  }
  return H;
}

Eigen::MatrixXd symmetric_orthogonalize(const Eigen::MatrixXd& M) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      M, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (sv.minCoeff() <= 1e-12 * sv.maxCoeff()) {
    throw DegeneratePairingError(
        "symmetric_orthogonalize: rank-deficient update (alpha ~ 0 pairing?)");
  }
  return svd.matrixU() * svd.matrixV().transpose();
}

namespace {

// Shared driver for the empirical and theoretical engines; step computes
// H(W) for the current iterate.
template <typename StepFn>
SeparationResult iterate_symmetric(const IterationConfig& cfg, StepFn&& step) {
  SeparationResult res;
  Eigen::MatrixXd W = orthonormalize(cfg.W0);
  const Eigen::Index d = W.rows();
  res.sign_vector = Eigen::VectorXd::Ones(d);
  Eigen::MatrixXd H;
  for (int k = 0; k < cfg.max_iter; ++k) {
    H = step(W);
    Eigen::MatrixXd W_new;
    try {
      W_new = symmetric_orthogonalize(H);
    } catch (const DegeneratePairingError& e) {
      res.W = W;
      res.iterations = k;
      res.diagnostic = std::string(e.what()) + "; " +
                       degenerate_alpha_diagnostic(H, W);
      return res;
    }
    res.final_delta = convergence_delta(W_new, W);
    res.sign_vector =
        (W_new * W.transpose()).diagonal().array().sign().matrix();
    W = W_new;
    res.iterations = k + 1;
    if (res.final_delta < cfg.tol) {
      res.converged = true;
      break;
    }
  }
  res.W = W;
  if (!res.converged) {
    res.diagnostic = "max_iter exhausted; " + degenerate_alpha_diagnostic(H, W);
  }
  return res;
}

// Flags rows whose empirical alpha cannot be told apart from zero.
void flag_degenerate_rows(SeparationResult& res, const Eigen::MatrixXd& X,
                          const NonlinearityList& nls) {
  const Eigen::Index d = res.W.rows();
  const Eigen::Index n = X.cols();
  const Eigen::MatrixXd P = res.W * X;
  for (Eigen::Index i = 0; i < d; ++i) {
    double mean = 0.0, m2 = 0.0;
    for (Eigen::Index t = 0; t < n; ++t) {
      const double u = P(i, t);
      const double a = nls[static_cast<std::size_t>(i)].gprime(u) -
                       nls[static_cast<std::size_t>(i)].g(u) * u;
      mean += a;
      m2 += a * a;
    }
    mean /= static_cast<double>(n);
    const double var = std::max(m2 / static_cast<double>(n) - mean * mean, 0.0);
    const double se = std::sqrt(var / static_cast<double>(n));
    if (std::abs(mean) < se) {
      res.degenerate_rows.push_back(static_cast<int>(i));
      res.diagnostic += "row " + std::to_string(i) +
                        ": empirical alpha indistinguishable from zero "
                        "(degenerate pairing suspected); ";
    }
  }
}

}  // namespace

SeparationResult generalized_symmetric(const StandardizedData& data,
                                       const IterationConfig& cfg) {
  if (cfg.tol <= 0.0) throw ParameterError("fastica: tol must be > 0");
  if (data.X.rows() < 2) {
    throw ParameterError("generalized_symmetric: need d >= 2");
  }
  SeparationResult res = iterate_symmetric(cfg, [&](const Eigen::MatrixXd& W) {
    return empirical_H(W, data.X, cfg.nls);
  });
  flag_degenerate_rows(res, data.X, cfg.nls);
  res.B = res.W * inv_sqrt_sym(data.C_hat);
  return res;
}

SeparationResult symmetric(const StandardizedData& data, const Nonlinearity& nl,
                           const Eigen::MatrixXd& W0, double tol,
                           int max_iter) {
  IterationConfig cfg;
  cfg.tol = tol;
  cfg.max_iter = max_iter;
  cfg.nls.assign(static_cast<std::size_t>(W0.rows()), nl);
  cfg.W0 = W0;
  return generalized_symmetric(data, cfg);
}

SeparationResult one_unit(const StandardizedData& data,
                          const IterationConfig& cfg) {
  const Eigen::Index d = data.X.rows();
  const Eigen::Index n = data.X.cols();
  Eigen::MatrixXd W0 = orthonormalize(cfg.W0);
  SeparationResult res;
  res.W.resize(d, d);
  res.sign_vector = Eigen::VectorXd::Ones(d);
  res.converged = true;
  int total_iter = 0;
  for (Eigen::Index i = 0; i < d; ++i) {
    Eigen::VectorXd w = W0.row(i).transpose();
    // deflate the start vector too
    for (Eigen::Index j = 0; j < i; ++j) {
      w -= res.W.row(j).transpose() * (res.W.row(j) * w);
    }
    if (w.norm() < 1e-12) {
      throw DegeneratePairingError("one_unit: start vector deflated to zero");
    }
    w.normalize();
    bool ok = false;
    double sign = 1.0;
    for (int k = 0; k < cfg.max_iter; ++k) {
      Eigen::VectorXd u = (w.transpose() * data.X).transpose();
      double mean_gp = 0.0;
      Eigen::VectorXd gb(n);
      for (Eigen::Index t = 0; t < n; ++t) {
        gb[t] = cfg.nls[static_cast<std::size_t>(i)].g(u[t]);
        mean_gp += cfg.nls[static_cast<std::size_t>(i)].gprime(u[t]);
      }
      mean_gp /= static_cast<double>(n);
      Eigen::VectorXd w_plus =
          mean_gp * w - data.X * gb / static_cast<double>(n);
      for (Eigen::Index j = 0; j < i; ++j) {
        w_plus -= res.W.row(j).transpose() * (res.W.row(j) * w_plus);
      }
      const double norm = w_plus.norm();
      if (norm < 1e-12) {
        throw DegeneratePairingError("one_unit: update collapsed (alpha ~ 0?)");
      }
      w_plus /= norm;
      ++total_iter;
      const double c = w_plus.dot(w);
      res.final_delta = 1.0 - std::abs(c);
      sign = c >= 0.0 ? 1.0 : -1.0;
      w = w_plus;
      if (res.final_delta < cfg.tol) {
        ok = true;
        break;
      }
    }
    res.W.row(i) = w.transpose();
    res.sign_vector[i] = sign;
    if (!ok) {
      res.converged = false;
      res.diagnostic = "one_unit: row " + std::to_string(i) + " did not converge";
    }
  }
  res.iterations = total_iter;
  flag_degenerate_rows(res, data.X, cfg.nls);
  res.B = res.W * inv_sqrt_sym(data.C_hat);
  return res;
}

double fixed_point_residual(const Eigen::MatrixXd& W, const Eigen::MatrixXd& X,
                            const NonlinearityList& nls) {
  const Eigen::MatrixXd F = symmetric_orthogonalize(empirical_H(W, X, nls));
  const Eigen::VectorXd lambda =
      (F * W.transpose()).diagonal().array().sign().matrix();
  return (F - lambda.asDiagonal() * W).norm();
}

double symmetry_defect(const Eigen::MatrixXd& W, const Eigen::MatrixXd& X,
                       const NonlinearityList& nls,
                       const Eigen::VectorXd& signs) {
  check_dims(W, X, nls);
  const Eigen::Index d = W.rows();
  const Eigen::Index n = X.cols();
  const Eigen::MatrixXd P = W * X;
  Eigen::MatrixXd Gt(d, n);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index t = 0; t < n; ++t) {
      Gt(i, t) = signs[i] * nls[static_cast<std::size_t>(i)].g(P(i, t));
    }
  }
  const Eigen::MatrixXd M = Gt * P.transpose() / static_cast<double>(n);
  return (M - M.transpose()).norm();
}

double local_contrast(const Eigen::MatrixXd& W, const Eigen::MatrixXd& X,
                      const NonlinearityList& nls,
                      const Eigen::VectorXd& signs) {
  check_dims(W, X, nls);
  const Eigen::MatrixXd P = W * X;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < W.rows(); ++i) {
    double m = 0.0;
    for (Eigen::Index t = 0; t < P.cols(); ++t) {
      m += nls[static_cast<std::size_t>(i)].G(P(i, t));
    }
    sum += signs[i] * m / static_cast<double>(P.cols());
  }
  return sum;
}

Eigen::Matrix3d two_angle_rotation(double phi, double chi) {
  Eigen::Matrix3d W;
  const double cp = std::cos(phi), sp = std::sin(phi);
  const double cc = std::cos(chi), sc = std::sin(chi);
  W << cp, -sp * cc, sp * sc,
       sp, cp * cc, -cp * sc,
       0.0, sc, cc;
  return W;
}

Eigen::MatrixXd contrast_surface(const std::vector<double>& phi_grid,
                                 const std::vector<double>& chi_grid,
                                 const Eigen::MatrixXd& X,
                                 const NonlinearityList& nls,
                                 const Eigen::VectorXd& signs) {
  if (X.rows() != 3) {
    throw UnsupportedDimensionError("contrast_surface: requires d = 3");
  }
  Eigen::MatrixXd J(static_cast<Eigen::Index>(phi_grid.size()),
                    static_cast<Eigen::Index>(chi_grid.size()));
  for (std::size_t a = 0; a < phi_grid.size(); ++a) {
    for (std::size_t b = 0; b < chi_grid.size(); ++b) {
      J(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
          local_contrast(two_angle_rotation(phi_grid[a], chi_grid[b]), X, nls,
                         signs);
    }
  }
  return J;
}

Eigen::MatrixXd theoretical_H(const Eigen::MatrixXd& W,
                              const TheoreticalModel& model,
                              const NonlinearityList& nls) {
  const Eigen::Index d = W.rows();
  if (model.A.rows() != d || static_cast<Eigen::Index>(model.specs.size()) != d ||
      static_cast<Eigen::Index>(nls.size()) != d) {
    throw ParameterError("theoretical_H: dimension mismatch");
  }
  Eigen::MatrixXd H(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    // w_i^T x = c^T z with c = A^T w_i; valid only when c = +-e_k.
    const Eigen::VectorXd c = model.A.transpose() * W.row(i).transpose();
    Eigen::Index k;
    const double ck = c.cwiseAbs().maxCoeff(&k);
    if (ck < 1.0 - 1e-8 ||
        (c.cwiseAbs().sum() - ck) > 1e-8) {
      throw NumericError(
          "theoretical_H: row not aligned with a source axis; the "
          "infinite-sample engine is defined at demixing configurations only");
    }
    const double s = c[k] >= 0.0 ? 1.0 : -1.0;
    const SourceSpec& spec = model.specs[static_cast<std::size_t>(k)];
    const Nonlinearity& nl = nls[static_cast<std::size_t>(i)];
    const auto [lo, hi] = spec.support();
    const double e_gp =
        quadrature::integrate_split(
            [&](double z) { return nl.gprime(s * z) * spec.pdf(z); }, lo, hi) +
        nl.g_jump() * spec.pdf(0.0);  // distributional-derivative correction
    const double e_gz = quadrature::integrate_split(
        [&](double z) { return nl.g(s * z) * z * spec.pdf(z); }, lo, hi);
    H.row(i) = e_gp * W.row(i) - e_gz * model.A.col(k).transpose();
  }
  return H;
}

SeparationResult theoretical_iterate(const TheoreticalModel& model,
                                     const IterationConfig& cfg) {
  SeparationResult res = iterate_symmetric(cfg, [&](const Eigen::MatrixXd& W) {
    return theoretical_H(W, model, cfg.nls);
  });
  res.B = res.W;  // no whitening context in the theoretical model
  return res;
}

double theoretical_fixed_point_residual(const Eigen::MatrixXd& W,
                                        const TheoreticalModel& model,
                                        const NonlinearityList& nls) {
  const Eigen::MatrixXd F =
      symmetric_orthogonalize(theoretical_H(W, model, nls));
  const Eigen::VectorXd lambda =
      (F * W.transpose()).diagonal().array().sign().matrix();
  return (F - lambda.asDiagonal() * W).norm();
}

}  // namespace gsfica
