#pragma once

#include <optional>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "gsfica/sources.hpp"

namespace gsfica {

enum class NlKind {
  Kurtosis,   // G = x^4/4
  Gauss,      // G = -exp(-x^2/2)
  Tanh,       // G = log cosh x
  Score,      // g = psi = f'/f of a known source
  ScaledScore // g = psi / kappa
};

// A contrast nonlinearity (G, g, g'). Immutable value type.
class Nonlinearity {
 public:
  static Nonlinearity kurtosis();
  static Nonlinearity gauss();
  static Nonlinearity tanh();
  static Nonlinearity score(const SourceSpec& spec);
  static Nonlinearity scaled_score(const SourceSpec& spec);

  NlKind kind() const { return kind_; }
  const std::optional<SourceSpec>& spec() const { return spec_; }

  double G(double x) const;
  double g(double x) const;
  double gprime(double x) const;

  // order: 0 -> G, 1 -> g, 2 -> g'
  double eval(int order, double x) const;

  // Jump g(0+) - g(0-): nonzero only for score kernels of kinked densities.
  // Expectations of the distributional g' must add g_jump() * pdf(0).
  double g_jump() const;

  nlohmann::json to_json() const;
  static Nonlinearity from_json(const nlohmann::json& j);

 private:
  Nonlinearity(NlKind kind, std::optional<SourceSpec> spec, double scale);

  NlKind kind_;
  std::optional<SourceSpec> spec_;
  double scale_ = 1.0;  // 1/kappa for ScaledScore
};

using NonlinearityList = std::vector<Nonlinearity>;

}  // namespace gsfica
