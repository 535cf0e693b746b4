#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "gsfica/rng.hpp"

namespace gsfica {

enum class SourceKind {
  GeneralizedGaussian,
  Laplace,
  Uniform,
  Gaussian,
  BimodalGaussian,
};

// A zero-mean, unit-variance source distribution. Immutable value type.
//
// Score convention: score() returns f'(x)/f(x) literally (no minus sign),
// so score(Gaussian, x) = -x. Every downstream quantity (kappa, CRB,
// optimal-nonlinearity variances) depends only on sign-insensitive
// combinations of the score.
class SourceSpec {
 public:
  static SourceSpec generalized_gaussian(double alpha);
  static SourceSpec laplace();
  static SourceSpec uniform();
  static SourceSpec gaussian();
  static SourceSpec bimodal(double mu1, double mu2);

  SourceKind kind() const { return kind_; }
  double gg_alpha() const { return alpha_; }
  double mu1() const { return mu1_; }
  double mu2() const { return mu2_; }

  double pdf(double x) const;
  double log_pdf(double x) const;

  // f'/f. Laplace at x = 0 returns 0 (symmetric subgradient midpoint);
  // Uniform returns 0 inside the support.
  double score(double x) const;
  // d(score)/dx, closed form (pointwise; excludes any delta at a kink).
  double score_prime(double x) const;
  // Jump score(0+) - score(0-) of a Laplace-type kink at the origin; zero for
  // densities whose score is continuous there. Needed because expectations of
  // the distributional derivative E[score'] pick up jump * pdf(0).
  double score_jump() const;
  // True when E[score^2] is finite (everything except Uniform and
  // GG(alpha <= 1/2)).
  bool has_finite_fisher() const;

  // kappa = E[score(s)^2] by quadrature. Throws NumericError when divergent.
  double fisher_kappa() const;

  // E[s^k], k <= 8, by quadrature (closed forms are exercised in tests).
  double moment(int k) const;

  bool symmetric() const;

  // [lo, hi] outside of which pdf < ~1e-16; used to truncate quadrature.
  std::pair<double, double> support() const;

  // i.i.d. draws; bit-reproducible for fixed (spec, n, seed).
  std::vector<double> sample(std::size_t n, std::uint64_t seed) const;
  double sample_one(Xoshiro256pp& rng) const;

  nlohmann::json to_json() const;
  static SourceSpec from_json(const nlohmann::json& j);

  bool operator==(const SourceSpec&) const = default;

 private:
  SourceSpec(SourceKind kind, double alpha, double mu1, double mu2);

  SourceKind kind_;
  double alpha_ = 0.0;       // GG shape
  double mu1_ = 0.0, mu2_ = 0.0;  // bimodal modes
  // cached derived constants
  double beta_ = 0.0;        // GG scale sqrt(Gamma(3/a)/Gamma(1/a))
  double norm_ = 0.0;        // GG density prefactor
  double p_ = 0.0;           // bimodal mixture weight
  double var_ = 0.0;         // bimodal component variance
};

}  // namespace gsfica
