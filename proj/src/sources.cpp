#include "gsfica/sources.hpp"

#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <nlohmann/json.hpp>

#include "gsfica/errors.hpp"
#include "gsfica/quadrature.hpp"

namespace gsfica {

namespace {

constexpr double kSqrt3 = 1.7320508075688772;
constexpr double kLaplaceScale = 0.7071067811865476;  // b = 1/sqrt(2)

double normal_pdf(double x, double mu, double var) {
  const double d = x - mu;
  return std::exp(-d * d / (2.0 * var)) / std::sqrt(2.0 * M_PI * var);
}

double normal_quantile(double u) {
  return M_SQRT2 * boost::math::erf_inv(2.0 * u - 1.0);
}

}  // namespace

SourceSpec::SourceSpec(SourceKind kind, double alpha, double mu1, double mu2)
    : kind_(kind), alpha_(alpha), mu1_(mu1), mu2_(mu2) {
  if (kind_ == SourceKind::GeneralizedGaussian) {
    using boost::math::tgamma;
    beta_ = std::sqrt(tgamma(3.0 / alpha_) / tgamma(1.0 / alpha_));
    norm_ = alpha_ * beta_ / (2.0 * tgamma(1.0 / alpha_));
  } else if (kind_ == SourceKind::BimodalGaussian) {
    p_ = std::abs(mu2_) / (std::abs(mu1_) + std::abs(mu2_));
    var_ = 1.0 - std::abs(mu1_ * mu2_);
  }
}

SourceSpec SourceSpec::generalized_gaussian(double alpha) {
  if (!(alpha > 0.0)) {
    throw ParameterError("generalized Gaussian requires alpha > 0");
  }
  return SourceSpec(SourceKind::GeneralizedGaussian, alpha, 0.0, 0.0);
}

SourceSpec SourceSpec::laplace() {
  return SourceSpec(SourceKind::Laplace, 0.0, 0.0, 0.0);
}

SourceSpec SourceSpec::uniform() {
  return SourceSpec(SourceKind::Uniform, 0.0, 0.0, 0.0);
}

SourceSpec SourceSpec::gaussian() {
  return SourceSpec(SourceKind::Gaussian, 0.0, 0.0, 0.0);
}

SourceSpec SourceSpec::bimodal(double mu1, double mu2) {
  if (!(mu1 * mu2 < 0.0)) {
    throw ParameterError("bimodal requires mu1*mu2 < 0");
  }
  if (!(std::abs(mu1 * mu2) < 1.0)) {
    throw ParameterError("bimodal requires |mu1*mu2| < 1");
  }
  return SourceSpec(SourceKind::BimodalGaussian, 0.0, mu1, mu2);
}

double SourceSpec::pdf(double x) const {
  switch (kind_) {
    case SourceKind::GeneralizedGaussian:
      return norm_ * std::exp(-std::pow(beta_ * std::abs(x), alpha_));
    case SourceKind::Laplace:
      return std::exp(-std::abs(x) / kLaplaceScale) / (2.0 * kLaplaceScale);
    case SourceKind::Uniform:
      return std::abs(x) <= kSqrt3 ? 1.0 / (2.0 * kSqrt3) : 0.0;
    case SourceKind::Gaussian:
      return normal_pdf(x, 0.0, 1.0);
    case SourceKind::BimodalGaussian:
      return p_ * normal_pdf(x, mu1_, var_) +
             (1.0 - p_) * normal_pdf(x, mu2_, var_);
  }
  return 0.0;
}

double SourceSpec::log_pdf(double x) const {
  switch (kind_) {
    case SourceKind::GeneralizedGaussian:
      return std::log(norm_) - std::pow(beta_ * std::abs(x), alpha_);
    case SourceKind::Laplace:
      return -std::abs(x) / kLaplaceScale - std::log(2.0 * kLaplaceScale);
    case SourceKind::Gaussian:
      return -0.5 * x * x - 0.5 * std::log(2.0 * M_PI);
    default:
      return std::log(pdf(x));
  }
}

double SourceSpec::score(double x) const {
  switch (kind_) {
    case SourceKind::GeneralizedGaussian:
      if (x == 0.0) return 0.0;
      return -alpha_ * std::pow(beta_, alpha_) *
             std::pow(std::abs(x), alpha_ - 1.0) * (x > 0.0 ? 1.0 : -1.0);
    case SourceKind::Laplace:
      if (x == 0.0) return 0.0;
      return -(x > 0.0 ? 1.0 : -1.0) / kLaplaceScale;
    case SourceKind::Uniform:
      return 0.0;
    case SourceKind::Gaussian:
      return -x;
    case SourceKind::BimodalGaussian: {
      const double f1 = normal_pdf(x, mu1_, var_);
      const double f2 = normal_pdf(x, mu2_, var_);
      const double f = p_ * f1 + (1.0 - p_) * f2;
      const double fp = -(p_ * f1 * (x - mu1_) + (1.0 - p_) * f2 * (x - mu2_)) / var_;
      return fp / f;
    }
  }
  return 0.0;
}

double SourceSpec::score_prime(double x) const {
  switch (kind_) {
    case SourceKind::GeneralizedGaussian:
      if (x == 0.0) return alpha_ == 2.0 ? -2.0 * beta_ * beta_ : 0.0;
      return -alpha_ * (alpha_ - 1.0) * std::pow(beta_, alpha_) *
             std::pow(std::abs(x), alpha_ - 2.0);
    case SourceKind::Laplace:
    case SourceKind::Uniform:
      return 0.0;
    case SourceKind::Gaussian:
      return -1.0;
    case SourceKind::BimodalGaussian: {
      // psi' = f''/f - psi^2
      const double f1 = normal_pdf(x, mu1_, var_);
      const double f2 = normal_pdf(x, mu2_, var_);
      const double f = p_ * f1 + (1.0 - p_) * f2;
      const double d1 = (x - mu1_), d2 = (x - mu2_);
      const double fpp = p_ * f1 * (d1 * d1 / (var_ * var_) - 1.0 / var_) +
                         (1.0 - p_) * f2 * (d2 * d2 / (var_ * var_) - 1.0 / var_);
      const double psi = score(x);
      return fpp / f - psi * psi;
    }
  }
  return 0.0;
}

double SourceSpec::score_jump() const {
  switch (kind_) {
    case SourceKind::Laplace:
      return -2.0 / kLaplaceScale;
    case SourceKind::GeneralizedGaussian:
      // alpha = 1 is the Laplace-type kink; smaller alpha has an integrable
      // singularity (no delta), larger alpha is continuous at 0.
      return alpha_ == 1.0 ? -2.0 * beta_ : 0.0;
    default:
      return 0.0;
  }
}

bool SourceSpec::has_finite_fisher() const {
  switch (kind_) {
    case SourceKind::Uniform:
      return false;  // density not differentiable at the support edges
    case SourceKind::GeneralizedGaussian:
      return alpha_ > 0.5;  // integrand ~ |x|^(2a-2) near 0
    default:
      return true;
  }
}

double SourceSpec::fisher_kappa() const {
  if (!has_finite_fisher()) {
    throw NumericError(
        "fisher_kappa: E[score^2] diverges for this source "
        "(Uniform or GG(alpha <= 1/2))");
  }
  const auto [lo, hi] = support();
  const double kappa = quadrature::integrate_split(
      [this](double x) {
        const double s = score(x);
        return s * s * pdf(x);
      },
      lo, hi);
  if (!std::isfinite(kappa) || kappa <= 0.0) {
    throw NumericError("fisher_kappa: quadrature failed");
  }
  return kappa;
}

double SourceSpec::moment(int k) const {
  if (k < 0 || k > 8) {
    throw ParameterError("moment: order must be in [0, 8]");
  }
  if (k == 0) return 1.0;
  if (symmetric() && (k % 2) == 1) return 0.0;
  const auto [lo, hi] = support();
  return quadrature::integrate_split(
      [this, k](double x) { return std::pow(x, k) * pdf(x); }, lo, hi);
}

bool SourceSpec::symmetric() const {
  if (kind_ == SourceKind::BimodalGaussian) return mu1_ == -mu2_;
  return true;
}

std::pair<double, double> SourceSpec::support() const {
  // pdf < ~1e-16 outside [lo, hi]
  constexpr double kLogCut = 16.0 * 2.302585092994046;  // ln(1e16)
  switch (kind_) {
    case SourceKind::Uniform:
      return {-kSqrt3, kSqrt3};
    case SourceKind::GeneralizedGaussian: {
      const double r = std::pow(std::log(norm_) + kLogCut, 1.0 / alpha_) / beta_;
      return {-r, r};
    }
    case SourceKind::Laplace: {
      const double r = kLaplaceScale * (kLogCut + 2.0);
      return {-r, r};
    }
    case SourceKind::Gaussian: {
      const double r = std::sqrt(2.0 * kLogCut) + 1.0;
      return {-r, r};
    }
    case SourceKind::BimodalGaussian: {
      const double r = std::sqrt(var_) * (std::sqrt(2.0 * kLogCut) + 1.0);
      return {std::min(mu1_, mu2_) - r, std::max(mu1_, mu2_) + r};
    }
  }
  return {-40.0, 40.0};
}

double SourceSpec::sample_one(Xoshiro256pp& rng) const {
  switch (kind_) {
    case SourceKind::Uniform:
      return (2.0 * rng.uniform_open() - 1.0) * kSqrt3;
    case SourceKind::Gaussian:
      return normal_quantile(rng.uniform_open());
    case SourceKind::Laplace: {
      const double u = rng.uniform_open();
      return u < 0.5 ? kLaplaceScale * std::log(2.0 * u)
                     : -kLaplaceScale * std::log(2.0 * (1.0 - u));
    }
    case SourceKind::GeneralizedGaussian: {
      // |x|^alpha * beta^alpha ~ Gamma(1/alpha): exact inverse-CDF transform.
      const double sign = rng.uniform_open() < 0.5 ? -1.0 : 1.0;
      const double g = boost::math::gamma_p_inv(1.0 / alpha_, rng.uniform_open());
      return sign * std::pow(g, 1.0 / alpha_) / beta_;
    }
    case SourceKind::BimodalGaussian: {
      const double mu = rng.uniform_open() < p_ ? mu1_ : mu2_;
      return mu + std::sqrt(var_) * normal_quantile(rng.uniform_open());
    }
  }
  return 0.0;
}

std::vector<double> SourceSpec::sample(std::size_t n, std::uint64_t seed) const {
  if (n < 1) throw ParameterError("sample: n must be >= 1");
  Xoshiro256pp rng(seed);
  std::vector<double> out(n);
  for (auto& v : out) v = sample_one(rng);
  return out;
}

nlohmann::json SourceSpec::to_json() const {
  switch (kind_) {
    case SourceKind::GeneralizedGaussian:
      return {{"kind", "gg"}, {"alpha", alpha_}};
    case SourceKind::Laplace:
      return {{"kind", "laplace"}};
    case SourceKind::Uniform:
      return {{"kind", "uniform"}};
    case SourceKind::Gaussian:
      return {{"kind", "gaussian"}};
    case SourceKind::BimodalGaussian:
      return {{"kind", "bimod"}, {"mu1", mu1_}, {"mu2", mu2_}};
  }
  return {};
}

SourceSpec SourceSpec::from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "gg") return generalized_gaussian(j.at("alpha").get<double>());
  if (kind == "laplace") return laplace();
  if (kind == "uniform") return uniform();
  if (kind == "gaussian") return gaussian();
  if (kind == "bimod") {
    return bimodal(j.at("mu1").get<double>(), j.at("mu2").get<double>());
  }
  throw ParameterError("unknown source kind: " + kind);
}

}  // namespace gsfica
