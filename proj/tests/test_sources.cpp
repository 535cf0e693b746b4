#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include <boost/math/special_functions/gamma.hpp>
#include <nlohmann/json.hpp>

#include "gsfica/errors.hpp"
#include "gsfica/quadrature.hpp"
#include "gsfica/sources.hpp"

using namespace gsfica;

namespace {

double integrate_pdf(const SourceSpec& s,
                     const std::function<double(double)>& h) {
  const auto [lo, hi] = s.support();
  return quadrature::integrate_split([&](double x) { return h(x) * s.pdf(x); },
                                     lo, hi);
}

const std::vector<SourceSpec> kAll = {
    SourceSpec::laplace(),
    SourceSpec::uniform(),
    SourceSpec::gaussian(),
    SourceSpec::generalized_gaussian(1.5),
    SourceSpec::generalized_gaussian(4.0),
    SourceSpec::bimodal(3.0, -0.3),
    SourceSpec::bimodal(1.0, -0.5),
};

}  // namespace

TEST_CASE("factory validation") {
  CHECK_THROWS_AS(SourceSpec::generalized_gaussian(0.0), ParameterError);
  CHECK_THROWS_AS(SourceSpec::generalized_gaussian(-1.0), ParameterError);
  CHECK_THROWS_AS(SourceSpec::bimodal(1.0, 0.5), ParameterError);   // same side
  CHECK_THROWS_AS(SourceSpec::bimodal(2.0, -1.0), ParameterError);  // |m1 m2| >= 1
  CHECK_THROWS_AS(SourceSpec::bimodal(0.0, -1.0), ParameterError);
}

TEST_CASE("densities are normalized with zero mean and unit variance") {
  for (const auto& s : kAll) {
    CAPTURE(static_cast<int>(s.kind()));
    CHECK(integrate_pdf(s, [](double) { return 1.0; }) ==
          doctest::Approx(1.0).epsilon(1e-9));
    CHECK(integrate_pdf(s, [](double x) { return x; }) ==
          doctest::Approx(0.0).epsilon(1e-9));
    CHECK(integrate_pdf(s, [](double x) { return x * x; }) ==
          doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("moments against closed forms") {
  CHECK(SourceSpec::uniform().moment(4) == doctest::Approx(9.0 / 5.0).epsilon(1e-10));
  CHECK(SourceSpec::uniform().moment(6) == doctest::Approx(27.0 / 7.0).epsilon(1e-10));
  CHECK(SourceSpec::laplace().moment(4) == doctest::Approx(6.0).epsilon(1e-10));
  CHECK(SourceSpec::gaussian().moment(4) == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(SourceSpec::gaussian().moment(6) == doctest::Approx(15.0).epsilon(1e-10));
  // Bimod(3, -0.3): mixture moments computed independently.
  const auto bim = SourceSpec::bimodal(3.0, -0.3);
  CHECK(bim.moment(3) == doctest::Approx(2.43).epsilon(1e-9));
  CHECK(bim.moment(4) == doctest::Approx(7.941).epsilon(1e-9));
  // GG(alpha): E|x|^m = Gamma((m+1)/a) / (Gamma(1/a) beta^m).
  for (double a : {1.5, 4.0}) {
    const auto gg = SourceSpec::generalized_gaussian(a);
    using boost::math::tgamma;
    const double beta = std::sqrt(tgamma(3.0 / a) / tgamma(1.0 / a));
    const double m4 = tgamma(5.0 / a) / (tgamma(1.0 / a) * std::pow(beta, 4));
    CHECK(gg.moment(4) == doctest::Approx(m4).epsilon(1e-9));
  }
  // Odd moments of symmetric laws vanish.
  CHECK(SourceSpec::laplace().moment(3) == doctest::Approx(0.0).epsilon(1e-10));
  CHECK_THROWS_AS(SourceSpec::laplace().moment(9), ParameterError);
}

TEST_CASE("score matches the derivative of log_pdf") {
  const double h = 1e-6;
  for (const auto& s : kAll) {
    if (s.kind() == SourceKind::Uniform) continue;
    for (double x : {-1.7, -0.4, 0.3, 0.9, 2.1}) {
      const double fd = (s.log_pdf(x + h) - s.log_pdf(x - h)) / (2 * h);
      CHECK(s.score(x) == doctest::Approx(fd).epsilon(1e-5));
      const double fd2 = (s.score(x + h) - s.score(x - h)) / (2 * h);
      CHECK(s.score_prime(x) == doctest::Approx(fd2).epsilon(1e-4));
    }
  }
  CHECK(SourceSpec::gaussian().score(1.3) == doctest::Approx(-1.3));
  CHECK(SourceSpec::laplace().score(0.0) == 0.0);
  CHECK(SourceSpec::uniform().score(0.5) == 0.0);
}

TEST_CASE("fisher information kappa") {
  CHECK(SourceSpec::laplace().fisher_kappa() == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(SourceSpec::gaussian().fisher_kappa() == doctest::Approx(1.0).epsilon(1e-9));
  // Closed form for GG: a^2 beta^2 Gamma(2 - 1/a) / Gamma(1/a).
  for (double a : {1.5, 3.0, 4.0}) {
    using boost::math::tgamma;
    const double beta = std::sqrt(tgamma(3.0 / a) / tgamma(1.0 / a));
    const double closed =
        a * a * beta * beta * tgamma(2.0 - 1.0 / a) / tgamma(1.0 / a);
    CHECK(SourceSpec::generalized_gaussian(a).fisher_kappa() ==
          doctest::Approx(closed).epsilon(1e-8));
  }
  CHECK(SourceSpec::generalized_gaussian(4.0).fisher_kappa() ==
        doctest::Approx(1.3708397).epsilon(1e-6));
  CHECK(SourceSpec::generalized_gaussian(3.0).fisher_kappa() ==
        doctest::Approx(1.1320934).epsilon(1e-6));

  CHECK_FALSE(SourceSpec::uniform().has_finite_fisher());
  CHECK_THROWS_AS(SourceSpec::uniform().fisher_kappa(), NumericError);
  CHECK_FALSE(SourceSpec::generalized_gaussian(0.4).has_finite_fisher());
  CHECK_THROWS_AS(SourceSpec::generalized_gaussian(0.4).fisher_kappa(),
                  NumericError);
}

TEST_CASE("sampling is reproducible and matches the distribution") {
  for (const auto& s : kAll) {
    const auto a = s.sample(1000, 12345);
    const auto b = s.sample(1000, 12345);
    CHECK(a == b);  // bit-identical
    const auto c = s.sample(1000, 54321);
    CHECK(a != c);
  }
  const std::size_t n = 200000;
  for (const auto& s : kAll) {
    const auto x = s.sample(n, 99);
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double var = 0.0, m4 = 0.0;
    for (double v : x) {
      var += (v - mean) * (v - mean);
      m4 += std::pow(v - mean, 4);
    }
    var /= n;
    m4 /= n;
    CAPTURE(static_cast<int>(s.kind()));
    CHECK(std::abs(mean) < 0.02);
    CHECK(var == doctest::Approx(1.0).epsilon(0.03));
    CHECK(m4 == doctest::Approx(s.moment(4)).epsilon(0.1));
  }
}

TEST_CASE("bounded support and symmetry flags") {
  const auto [lo, hi] = SourceSpec::uniform().support();
  CHECK(lo == doctest::Approx(-std::sqrt(3.0)));
  CHECK(hi == doctest::Approx(std::sqrt(3.0)));
  CHECK(SourceSpec::laplace().symmetric());
  CHECK_FALSE(SourceSpec::bimodal(3.0, -0.3).symmetric());
  CHECK(SourceSpec::bimodal(0.5, -0.5).symmetric());
}

TEST_CASE("JSON round trip") {
  for (const auto& s : kAll) {
    const auto back = SourceSpec::from_json(s.to_json());
    CHECK(back == s);
  }
  CHECK_THROWS_AS(SourceSpec::from_json(nlohmann::json{{"kind", "cauchy"}}),
                  ParameterError);
}
