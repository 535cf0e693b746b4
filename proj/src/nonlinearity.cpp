#include "gsfica/nonlinearity.hpp"

#include <cmath>
#include <nlohmann/json.hpp>

#include "gsfica/errors.hpp"

namespace gsfica {

namespace {

// log cosh without overflow: |x| + log((1 + e^{-2|x|})/2)
double log_cosh(double x) {
  const double a = std::abs(x);
  return a + std::log1p(std::exp(-2.0 * a)) - M_LN2;
}

double sech2(double x) {
  const double t = std::tanh(x);
  return 1.0 - t * t;
}

}  // namespace

Nonlinearity::Nonlinearity(NlKind kind, std::optional<SourceSpec> spec,
                           double scale)
    : kind_(kind), spec_(std::move(spec)), scale_(scale) {}

Nonlinearity Nonlinearity::kurtosis() {
  return Nonlinearity(NlKind::Kurtosis, std::nullopt, 1.0);
}
Nonlinearity Nonlinearity::gauss() {
  return Nonlinearity(NlKind::Gauss, std::nullopt, 1.0);
}
Nonlinearity Nonlinearity::tanh() {
  return Nonlinearity(NlKind::Tanh, std::nullopt, 1.0);
}
Nonlinearity Nonlinearity::score(const SourceSpec& spec) {
  return Nonlinearity(NlKind::Score, spec, 1.0);
}
Nonlinearity Nonlinearity::scaled_score(const SourceSpec& spec) {
  return Nonlinearity(NlKind::ScaledScore, spec, 1.0 / spec.fisher_kappa());
}

double Nonlinearity::G(double x) const {
  switch (kind_) {
    case NlKind::Kurtosis:
      return 0.25 * x * x * x * x;
    case NlKind::Gauss:
      return -std::exp(-0.5 * x * x);
    case NlKind::Tanh:
      return log_cosh(x);
    case NlKind::Score:
    case NlKind::ScaledScore:
      // G(x) = integral of psi from 0 to x = log f(x) - log f(0)
      return scale_ * (spec_->log_pdf(x) - spec_->log_pdf(0.0));
  }
  return 0.0;
}

double Nonlinearity::g(double x) const {
  switch (kind_) {
    case NlKind::Kurtosis:
      return x * x * x;
    case NlKind::Gauss:
      return x * std::exp(-0.5 * x * x);
    case NlKind::Tanh:
      return std::tanh(x);
    case NlKind::Score:
    case NlKind::ScaledScore:
      return scale_ * spec_->score(x);
  }
  return 0.0;
}

double Nonlinearity::gprime(double x) const {
  switch (kind_) {
    case NlKind::Kurtosis:
      return 3.0 * x * x;
    case NlKind::Gauss:
      return (1.0 - x * x) * std::exp(-0.5 * x * x);
    case NlKind::Tanh:
      return sech2(x);
    case NlKind::Score:
    case NlKind::ScaledScore:
      return scale_ * spec_->score_prime(x);
  }
  return 0.0;
}

double Nonlinearity::eval(int order, double x) const {
  switch (order) {
    case 0:
      return G(x);
    case 1:
      return g(x);
    case 2:
      return gprime(x);
    default:
      throw ParameterError("Nonlinearity::eval: order must be 0, 1 or 2");
  }
}

double Nonlinearity::g_jump() const {
  if (kind_ == NlKind::Score || kind_ == NlKind::ScaledScore) {
    return scale_ * spec_->score_jump();
  }
  return 0.0;
}

nlohmann::json Nonlinearity::to_json() const {
  switch (kind_) {
    case NlKind::Kurtosis:
      return "kurtosis";
    case NlKind::Gauss:
      return "gauss";
    case NlKind::Tanh:
      return "tanh";
    case NlKind::Score:
      return {{"score", spec_->to_json()}};
    case NlKind::ScaledScore:
      return {{"scaled_score", spec_->to_json()}};
  }
  return {};
}

Nonlinearity Nonlinearity::from_json(const nlohmann::json& j) {
  if (j.is_string()) {
    const std::string name = j.get<std::string>();
    if (name == "kurtosis") return kurtosis();
    if (name == "gauss") return gauss();
    if (name == "tanh") return tanh();
    throw ParameterError("unknown nonlinearity: " + name);
  }
  if (j.contains("score")) return score(SourceSpec::from_json(j.at("score")));
  if (j.contains("scaled_score")) {
    return scaled_score(SourceSpec::from_json(j.at("scaled_score")));
  }
  throw ParameterError("unrecognized nonlinearity JSON");
}

}  // namespace gsfica
