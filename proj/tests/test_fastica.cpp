#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "gsfica/asymptotics.hpp"
#include "gsfica/errors.hpp"
#include "gsfica/fastica.hpp"
#include "gsfica/metrics.hpp"
#include "gsfica/preprocess.hpp"
#include "gsfica/rng.hpp"

using namespace gsfica;

namespace {

Eigen::MatrixXd random_matrix(Eigen::Index r, Eigen::Index c,
                              std::uint64_t seed) {
  Xoshiro256pp rng(seed);
  const auto normal = SourceSpec::gaussian();
  Eigen::MatrixXd M(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    for (Eigen::Index j = 0; j < c; ++j) M(i, j) = normal.sample_one(rng);
  }
  return M;
}

struct Mixture {
  Eigen::MatrixXd Y;
  Eigen::MatrixXd H;
};

Mixture make_mixture(const std::vector<SourceSpec>& specs, Eigen::Index n,
                     std::uint64_t seed, bool random_mix) {
  const Eigen::Index d = static_cast<Eigen::Index>(specs.size());
  Eigen::MatrixXd S(d, n);
  for (Eigen::Index i = 0; i < d; ++i) {
    const auto draws = specs[static_cast<std::size_t>(i)].sample(
        static_cast<std::size_t>(n),
        derive_seed(seed, static_cast<std::uint64_t>(i)));
    for (Eigen::Index t = 0; t < n; ++t) S(i, t) = draws[static_cast<std::size_t>(t)];
  }
  Mixture m;
  m.H = random_mix ? Eigen::MatrixXd(random_matrix(d, d, seed + 99) +
                                     3.0 * Eigen::MatrixXd::Identity(d, d))
                   : Eigen::MatrixXd(Eigen::MatrixXd::Identity(d, d));
  m.Y = m.H * S;
  return m;
}

}  // namespace

TEST_CASE("symmetric_orthogonalize returns the orthogonal polar factor") {
  const Eigen::MatrixXd M = random_matrix(4, 4, 5) +
                            2.0 * Eigen::MatrixXd::Identity(4, 4);
  const Eigen::MatrixXd Q = symmetric_orthogonalize(M);
  CHECK((Q * Q.transpose() - Eigen::MatrixXd::Identity(4, 4)).norm() < 1e-12);
  // The polar factor of an orthogonal matrix is itself.
  CHECK((symmetric_orthogonalize(Q) - Q).norm() < 1e-12);
  // Polar factor maximizes tr(Q M^T): symmetric positive product.
  const Eigen::MatrixXd P = Q.transpose() * M;
  CHECK((P - P.transpose()).norm() < 1e-10);
  CHECK_THROWS_AS(symmetric_orthogonalize(Eigen::MatrixXd::Zero(3, 3)),
                  DegeneratePairingError);
}

TEST_CASE("generalized symmetric FastICA separates a random mixture") {
  const std::vector<SourceSpec> specs = {SourceSpec::uniform(),
                                         SourceSpec::laplace(),
                                         SourceSpec::generalized_gaussian(4.0)};
  const Mixture m = make_mixture(specs, 20000, 2024, true);
  const StandardizedData data = standardize(m.Y, Centering::Empirical);
  IterationConfig cfg;
  cfg.nls = {Nonlinearity::kurtosis(), Nonlinearity::tanh(),
             Nonlinearity::gauss()};
  cfg.W0 = Eigen::MatrixXd::Identity(3, 3);
  cfg.tol = 1e-13;  // converge to the empirical fixed point itself
  const SeparationResult res = generalized_symmetric(data, cfg);
  REQUIRE(res.converged);
  CHECK(res.degenerate_rows.empty());
  CHECK((res.W * res.W.transpose() - Eigen::MatrixXd::Identity(3, 3)).norm() <
        1e-10);
  const GainReport rep = gain_report(res.B, m.H);
  CHECK(rep.off_index < 0.01);
  // At the converged iterate the fixed-point residual and the symmetry defect
  // are tiny.
  CHECK(fixed_point_residual(res.W, data.X, cfg.nls) < 1e-7);
  CHECK(symmetry_defect(res.W, data.X, cfg.nls, res.sign_vector) < 1e-7);
  CHECK(res.final_delta <= cfg.tol);
}

TEST_CASE("one-unit deflation separates the same mixture") {
  const std::vector<SourceSpec> specs = {SourceSpec::uniform(),
                                         SourceSpec::laplace()};
  const Mixture m = make_mixture(specs, 20000, 7, true);
  const StandardizedData data = standardize(m.Y, Centering::Empirical);
  IterationConfig cfg;
  cfg.nls = {Nonlinearity::kurtosis(), Nonlinearity::kurtosis()};
  cfg.W0 = Eigen::MatrixXd::Identity(2, 2);
  const SeparationResult res = one_unit(data, cfg);
  REQUIRE(res.converged);
  CHECK((res.W * res.W.transpose() - Eigen::MatrixXd::Identity(2, 2)).norm() <
        1e-10);
  CHECK(gain_report(res.B, m.H).off_index < 0.01);
}

TEST_CASE("plain symmetric FastICA is the shared-nonlinearity special case") {
  const std::vector<SourceSpec> specs = {SourceSpec::uniform(),
                                         SourceSpec::laplace()};
  const Mixture m = make_mixture(specs, 20000, 13, true);
  const StandardizedData data = standardize(m.Y, Centering::Empirical);
  const Eigen::MatrixXd W0 = Eigen::MatrixXd::Identity(2, 2);
  const SeparationResult a =
      symmetric(data, Nonlinearity::tanh(), W0);
  IterationConfig cfg;
  cfg.nls = {Nonlinearity::tanh(), Nonlinearity::tanh()};
  cfg.W0 = W0;
  const SeparationResult b = generalized_symmetric(data, cfg);
  REQUIRE(a.converged);
  REQUIRE(b.converged);
  CHECK((a.W - b.W).norm() < 1e-12);
}

TEST_CASE("a Gaussian source under kurtosis is flagged, not thrown") {
  const std::vector<SourceSpec> specs = {SourceSpec::gaussian(),
                                         SourceSpec::gaussian()};
  const Mixture m = make_mixture(specs, 5000, 3, false);
  const StandardizedData data = standardize(m.Y, Centering::Empirical);
  IterationConfig cfg;
  cfg.nls = {Nonlinearity::kurtosis(), Nonlinearity::kurtosis()};
  cfg.W0 = Eigen::MatrixXd::Identity(2, 2);
  cfg.max_iter = 50;
  const SeparationResult res = generalized_symmetric(data, cfg);
  // The run either stalls or lands on a noise direction; both are flagged.
  CHECK((!res.converged || !res.degenerate_rows.empty()));
  CHECK_FALSE(res.diagnostic.empty());
}

TEST_CASE("two-angle rotation family") {
  CHECK((two_angle_rotation(0.0, 0.0) - Eigen::Matrix3d::Identity()).norm() <
        1e-15);
  for (double phi : {-1.1, 0.4}) {
    for (double chi : {0.9, -2.0}) {
      const Eigen::Matrix3d W = two_angle_rotation(phi, chi);
      CHECK((W * W.transpose() - Eigen::Matrix3d::Identity()).norm() < 1e-14);
    }
  }
}

TEST_CASE("contrast surface requires three channels") {
  const Mixture m = make_mixture({SourceSpec::uniform(), SourceSpec::laplace()},
                                 1000, 21, false);
  const StandardizedData data = standardize(m.Y, Centering::Empirical);
  NonlinearityList nls = {Nonlinearity::kurtosis(), Nonlinearity::kurtosis()};
  CHECK_THROWS_AS(contrast_surface({0.0}, {0.0}, data.X, nls,
                                   Eigen::VectorXd::Ones(2)),
                  UnsupportedDimensionError);
}

TEST_CASE("theoretical engine fixed points sit at source axes") {
  TheoreticalModel model;
  model.specs = {SourceSpec::uniform(), SourceSpec::uniform(),
                 SourceSpec::laplace()};
  model.A = Eigen::MatrixXd::Identity(3, 3);
  NonlinearityList nls = {Nonlinearity::kurtosis(), Nonlinearity::kurtosis(),
                          Nonlinearity::kurtosis()};
  // H at the demixing point: row i = alpha_i e_i.
  const Eigen::MatrixXd H =
      theoretical_H(Eigen::MatrixXd::Identity(3, 3), model, nls);
  CHECK(H(0, 0) == doctest::Approx(1.2).epsilon(1e-9));
  CHECK(H(1, 1) == doctest::Approx(1.2).epsilon(1e-9));
  CHECK(H(2, 2) == doctest::Approx(-3.0).epsilon(1e-9));
  CHECK(H.cwiseAbs().sum() ==
        doctest::Approx(std::abs(H(0, 0)) + std::abs(H(1, 1)) +
                        std::abs(H(2, 2))).epsilon(1e-9));
  CHECK(theoretical_fixed_point_residual(Eigen::MatrixXd::Identity(3, 3), model,
                                         nls) < 1e-9);

  IterationConfig cfg;
  cfg.nls = nls;
  cfg.W0 = Eigen::MatrixXd::Identity(3, 3);
  const SeparationResult res = theoretical_iterate(model, cfg);
  REQUIRE(res.converged);
  // Up to signs, the iteration stays at the identity.
  CHECK((res.W.cwiseAbs() - Eigen::MatrixXd::Identity(3, 3)).norm() < 1e-9);
  CHECK(res.sign_vector.size() == 3);
}

TEST_CASE("permuted starts converge to permuted assignments") {
  TheoreticalModel model;
  model.specs = {SourceSpec::bimodal(3.0, -0.3),
                 SourceSpec::generalized_gaussian(4.0), SourceSpec::laplace()};
  model.A = Eigen::MatrixXd::Identity(3, 3);
  NonlinearityList nls = {Nonlinearity::kurtosis(), Nonlinearity::gauss(),
                          Nonlinearity::tanh()};
  Eigen::MatrixXd W0(3, 3);
  W0 << 0, 1, 0,
        0, 0, 1,
        1, 0, 0;  // rows e2, e3, e1
  IterationConfig cfg;
  cfg.nls = nls;
  cfg.W0 = W0;
  const SeparationResult res = theoretical_iterate(model, cfg);
  REQUIRE(res.converged);
  CHECK((res.W.cwiseAbs() - W0).norm() < 1e-9);
}
