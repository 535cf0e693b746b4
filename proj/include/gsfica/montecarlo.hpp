#pragma once

#include <Eigen/Dense>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "gsfica/fastica.hpp"
#include "gsfica/metrics.hpp"
#include "gsfica/preprocess.hpp"
#include "gsfica/sources.hpp"

namespace gsfica {

enum class Algorithm { OneUnit, Symmetric, GeneralizedSymmetric };

struct ExperimentConfig {
  std::vector<SourceSpec> specs;
  Eigen::MatrixXd H;   // mixing matrix, nonsingular
  NonlinearityList nls;
  Eigen::MatrixXd W0;  // initial iterate (orthonormalized by the engine)
  long N = 0;          // samples per trial
  int trials = 1;
  Centering centering = Centering::Empirical;
  std::uint64_t base_seed = 0;
  Algorithm algorithm = Algorithm::GeneralizedSymmetric;
  double tol = 1e-9;
  int max_iter = 1000;

  void validate() const;  // throws ParameterError
  nlohmann::json to_json() const;
  static ExperimentConfig from_json(const nlohmann::json& j);
};

struct TrialRecord {
  bool converged = false;
  bool degenerate = false;  // a row's empirical alpha was flagged as ~ 0
  int iterations = 0;
  GainReport gain;
  std::string diagnostic;

  bool usable() const { return converged && !degenerate; }
};

struct Histogram {
  double lo = 0.0, hi = 0.0;  // range (+-4 predicted stddev)
  std::vector<long> counts;   // 50 bins; under/overflow folded into end bins
};

struct Aggregate {
  int trials = 0;
  int failures = 0;
  // Empirical variance of sqrt(N) (G_hat(i, sigma(j)) - delta_ij signs_i),
  // indexed by (row i, source j).
  Eigen::MatrixXd variance;
  Eigen::MatrixXd predicted;  // matching theoretical V, NaN where unavailable
  double mean_scaled_off = 0.0;    // mean of N * off_index
  double stderr_scaled_off = 0.0;  // standard error of that mean
  double predicted_off = 0.0;      // sum over i != j of V(i, sigma(j))
  std::vector<int> sigma;          // modal assignment across trials
  std::vector<std::vector<Histogram>> histograms;  // [i][j]
  double mean_iterations = 0.0;
  int max_iterations = 0;

  nlohmann::json to_json() const;
};

TrialRecord run_trial(const ExperimentConfig& cfg, int t);

// Runs all trials on a worker pool (size capped by GSFICA_THREADS) and merges
// them in trial order, so the result is independent of thread count.
// Throws NumericError when more than half of the trials fail.
Aggregate run_experiment(const ExperimentConfig& cfg);

}  // namespace gsfica
