#include "gsfica/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <map>
#include <optional>
#include <thread>

#include "gsfica/asymptotics.hpp"
#include "gsfica/errors.hpp"
#include "gsfica/rng.hpp"

namespace gsfica {

namespace {

constexpr int kHistogramBins = 50;

std::string centering_name(Centering c) {
  switch (c) {
    case Centering::Empirical: return "empirical";
    case Centering::Exact: return "exact";
    case Centering::None: return "none";
  }
  return "empirical";
}

Centering centering_from_name(const std::string& s) {
  if (s == "empirical") return Centering::Empirical;
  if (s == "exact") return Centering::Exact;
  if (s == "none") return Centering::None;
  throw ParameterError("unknown centering mode: " + s);
}

std::string algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::OneUnit: return "one_unit";
    case Algorithm::Symmetric: return "symmetric";
    case Algorithm::GeneralizedSymmetric: return "generalized_symmetric";
  }
  return "generalized_symmetric";
}

Algorithm algorithm_from_name(const std::string& s) {
  if (s == "one_unit") return Algorithm::OneUnit;
  if (s == "symmetric") return Algorithm::Symmetric;
  if (s == "generalized_symmetric") return Algorithm::GeneralizedSymmetric;
  throw ParameterError("unknown algorithm: " + s);
}

nlohmann::json matrix_to_json(const Eigen::MatrixXd& M) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(row);
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.empty()) {
    throw ParameterError("matrix JSON must be a nonempty array of rows");
  }
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  const Eigen::Index cols = static_cast<Eigen::Index>(j.at(0).size());
  Eigen::MatrixXd M(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = j.at(static_cast<std::size_t>(i));
    if (static_cast<Eigen::Index>(row.size()) != cols) {
      throw ParameterError("matrix JSON rows have unequal length");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      M(i, c) = row.at(static_cast<std::size_t>(c)).get<double>();
    }
  }
  return M;
}

int pool_size(int trials) {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  if (const char* env = std::getenv("GSFICA_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1) hw = std::min<unsigned>(hw, static_cast<unsigned>(cap));
  }
  return static_cast<int>(std::min<unsigned>(hw, static_cast<unsigned>(trials)));
}

}  // namespace

void ExperimentConfig::validate() const {
  const Eigen::Index d = H.rows();
  if (d == 0 || H.cols() != d) {
    throw ParameterError("ExperimentConfig: H must be square and nonempty");
  }
  if (static_cast<Eigen::Index>(specs.size()) != d ||
      static_cast<Eigen::Index>(nls.size()) != d) {
    throw ParameterError("ExperimentConfig: specs/nls size must match H");
  }
  if (W0.rows() != d || W0.cols() != d) {
    throw ParameterError("ExperimentConfig: W0 must be d x d");
  }
  if (N <= d) throw ParameterError("ExperimentConfig: need N > d");
  if (trials < 1) throw ParameterError("ExperimentConfig: trials >= 1");
  Eigen::FullPivLU<Eigen::MatrixXd> lu(H);
  if (!lu.isInvertible()) {
    throw ParameterError("ExperimentConfig: H is singular");
  }
  if (tol <= 0 || max_iter < 1) {
    throw ParameterError("ExperimentConfig: bad tol/max_iter");
  }
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j;
  j["sources"] = nlohmann::json::array();
  for (const auto& s : specs) j["sources"].push_back(s.to_json());
  j["H"] = matrix_to_json(H);
  j["nonlinearities"] = nlohmann::json::array();
  for (const auto& n : nls) j["nonlinearities"].push_back(n.to_json());
  j["W0"] = matrix_to_json(W0);
  j["N"] = N;
  j["trials"] = trials;
  j["centering"] = centering_name(centering);
  j["base_seed"] = base_seed;
  j["algorithm"] = algorithm_name(algorithm);
  j["tol"] = tol;
  j["max_iter"] = max_iter;
  return j;
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  ExperimentConfig cfg;
  for (const auto& s : j.at("sources")) {
    cfg.specs.push_back(SourceSpec::from_json(s));
  }
  cfg.H = matrix_from_json(j.at("H"));
  for (const auto& n : j.at("nonlinearities")) {
    cfg.nls.push_back(Nonlinearity::from_json(n));
  }
  if (j.contains("W0")) {
    cfg.W0 = matrix_from_json(j.at("W0"));
  } else {
    cfg.W0 = Eigen::MatrixXd::Identity(cfg.H.rows(), cfg.H.cols());
  }
  cfg.N = j.at("N").get<long>();
  cfg.trials = j.value("trials", 1);
  cfg.centering = centering_from_name(j.value("centering", "empirical"));
  cfg.base_seed = j.value("base_seed", std::uint64_t{0});
  cfg.algorithm =
      algorithm_from_name(j.value("algorithm", "generalized_symmetric"));
  cfg.tol = j.value("tol", 1e-9);
  cfg.max_iter = j.value("max_iter", 1000);
  cfg.validate();
  return cfg;
}

TrialRecord run_trial(const ExperimentConfig& cfg, int t) {
  cfg.validate();
  const Eigen::Index d = cfg.H.rows();
  const std::uint64_t trial_seed =
      derive_seed(cfg.base_seed, static_cast<std::uint64_t>(t));

  Eigen::MatrixXd S(d, cfg.N);
  for (Eigen::Index i = 0; i < d; ++i) {
    const std::uint64_t row_seed =
        derive_seed(trial_seed, static_cast<std::uint64_t>(i));
    const std::vector<double> draws =
        cfg.specs[static_cast<std::size_t>(i)].sample(
            static_cast<std::size_t>(cfg.N), row_seed);
    for (long n = 0; n < cfg.N; ++n) {
      S(i, n) = draws[static_cast<std::size_t>(n)];
    }
  }
  const Eigen::MatrixXd Y = cfg.H * S;

  TrialRecord rec;
  try {
    std::optional<Eigen::VectorXd> exact_mean;
    if (cfg.centering == Centering::Exact) {
      exact_mean = Eigen::VectorXd::Zero(d);  // sources are zero-mean
    }
    const StandardizedData data = standardize(Y, cfg.centering, exact_mean);

    IterationConfig icfg;
    icfg.tol = cfg.tol;
    icfg.max_iter = cfg.max_iter;
    icfg.nls = cfg.nls;
    icfg.W0 = cfg.W0;
    SeparationResult res;
    switch (cfg.algorithm) {
      case Algorithm::OneUnit:
        res = one_unit(data, icfg);
        break;
      case Algorithm::Symmetric:
        res = symmetric(data, cfg.nls.front(), cfg.W0, cfg.tol, cfg.max_iter);
        break;
      case Algorithm::GeneralizedSymmetric:
        res = generalized_symmetric(data, icfg);
        break;
    }
    rec.converged = res.converged;
    rec.degenerate = !res.degenerate_rows.empty();
    rec.iterations = res.iterations;
    rec.diagnostic = res.diagnostic;
    rec.gain = gain_report(res.B, cfg.H);
  } catch (const Error& e) {
    rec.converged = false;
    rec.diagnostic = e.what();
  }
  return rec;
}

Aggregate run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const int d = static_cast<int>(cfg.H.rows());
  std::vector<TrialRecord> records(static_cast<std::size_t>(cfg.trials));

  const int workers = pool_size(cfg.trials);
  std::atomic<int> next{0};
  auto work = [&]() {
    for (;;) {
      const int t = next.fetch_add(1);
      if (t >= cfg.trials) break;
      records[static_cast<std::size_t>(t)] = run_trial(cfg, t);
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) threads.emplace_back(work);
    for (auto& th : threads) th.join();
  }

  Aggregate agg;
  agg.trials = cfg.trials;
  for (const auto& rec : records) {
    if (!rec.usable()) ++agg.failures;
  }
  if (2 * agg.failures > cfg.trials) {
    throw NumericError(
        "run_experiment: more than half of the trials failed to converge; "
        "experiment invalid (" +
        std::to_string(agg.failures) + "/" + std::to_string(cfg.trials) + ")");
  }

  // Modal assignment across converged trials.
  std::map<std::vector<int>, int> sigma_counts;
  for (const auto& rec : records) {
    if (rec.usable()) ++sigma_counts[rec.gain.sigma];
  }
  int best = -1;
  for (const auto& [sig, count] : sigma_counts) {
    if (count > best) {
      best = count;
      agg.sigma = sig;
    }
  }
  if (agg.sigma.empty()) {
    agg.sigma.resize(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) agg.sigma[static_cast<std::size_t>(i)] = i;
  }
  std::vector<int> inv_sigma(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) {
    inv_sigma[static_cast<std::size_t>(agg.sigma[static_cast<std::size_t>(i)])] = i;
  }

  // Theoretical predictions under the modal assignment.
  agg.predicted = Eigen::MatrixXd::Constant(
      d, d, std::numeric_limits<double>::quiet_NaN());
  try {
    const MomentFunctionals f =
        moment_functionals(cfg.specs, cfg.nls, agg.sigma);
    Variant variant = Variant::GeneralizedEmpiricalCentering;
    if (cfg.algorithm == Algorithm::OneUnit) {
      variant = Variant::OneUnit;
    } else if (cfg.centering == Centering::Exact) {
      variant = Variant::ExactCentering;
    }
    agg.predicted_off = 0.0;
    for (int i = 0; i < d; ++i) {
      for (int c = 0; c < d; ++c) {
        const int j = inv_sigma[static_cast<std::size_t>(c)];
        agg.predicted(i, c) = gain_variance(f, variant, i, j);
        if (c != agg.sigma[static_cast<std::size_t>(i)]) {
          agg.predicted_off += agg.predicted(i, c);
        }
      }
    }
  } catch (const Error&) {
    agg.predicted_off = std::numeric_limits<double>::quiet_NaN();
  }

  // Accumulate the centered, sqrt(N)-scaled gain statistics in trial order.
  const double sqrt_n = std::sqrt(static_cast<double>(cfg.N));
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(d, d);
  Eigen::MatrixXd sum_sq = Eigen::MatrixXd::Zero(d, d);
  double off_sum = 0.0, off_sum_sq = 0.0;
  long iter_sum = 0;
  agg.histograms.assign(
      static_cast<std::size_t>(d),
      std::vector<Histogram>(static_cast<std::size_t>(d)));
  for (int i = 0; i < d; ++i) {
    for (int c = 0; c < d; ++c) {
      Histogram& h = agg.histograms[static_cast<std::size_t>(i)]
                                   [static_cast<std::size_t>(c)];
      const double sd = std::isfinite(agg.predicted(i, c)) &&
                                agg.predicted(i, c) > 0.0
                            ? std::sqrt(agg.predicted(i, c))
                            : 1.0;
      h.lo = -4.0 * sd;
      h.hi = 4.0 * sd;
      h.counts.assign(kHistogramBins, 0);
    }
  }

  int used = 0;
  for (const auto& rec : records) {
    agg.max_iterations = std::max(agg.max_iterations, rec.iterations);
    iter_sum += rec.iterations;
    if (!rec.usable()) continue;
    ++used;
    const GainReport& gr = rec.gain;
    for (int i = 0; i < d; ++i) {
      for (int c = 0; c < d; ++c) {
        const double target =
            (c == gr.sigma[static_cast<std::size_t>(i)]) ? gr.signs[i] : 0.0;
        const double x = sqrt_n * (gr.G(i, c) - target);
        sum(i, c) += x;
        sum_sq(i, c) += x * x;
        Histogram& h = agg.histograms[static_cast<std::size_t>(i)]
                                     [static_cast<std::size_t>(c)];
        int bin = static_cast<int>(std::floor(
            (x - h.lo) / (h.hi - h.lo) * kHistogramBins));
        bin = std::clamp(bin, 0, kHistogramBins - 1);
        ++h.counts[static_cast<std::size_t>(bin)];
      }
    }
    const double scaled_off =
        static_cast<double>(cfg.N) * gr.off_index;
    off_sum += scaled_off;
    off_sum_sq += scaled_off * scaled_off;
  }

  agg.variance = Eigen::MatrixXd::Zero(d, d);
  if (used > 1) {
    for (int i = 0; i < d; ++i) {
      for (int c = 0; c < d; ++c) {
        const double mean = sum(i, c) / used;
        agg.variance(i, c) =
            (sum_sq(i, c) - used * mean * mean) / (used - 1);
      }
    }
    const double off_mean = off_sum / used;
    agg.mean_scaled_off = off_mean;
    const double off_var =
        (off_sum_sq - used * off_mean * off_mean) / (used - 1);
    agg.stderr_scaled_off = std::sqrt(std::max(off_var, 0.0) / used);
  } else if (used == 1) {
    agg.mean_scaled_off = off_sum;
  }
  agg.mean_iterations =
      cfg.trials > 0 ? static_cast<double>(iter_sum) / cfg.trials : 0.0;
  return agg;
}

nlohmann::json Aggregate::to_json() const {
  nlohmann::json j;
  j["trials"] = trials;
  j["failures"] = failures;
  j["variance"] = matrix_to_json(variance);
  j["predicted_variance"] = matrix_to_json(predicted);
  j["mean_scaled_off"] = mean_scaled_off;
  j["stderr_scaled_off"] = stderr_scaled_off;
  j["predicted_off"] = predicted_off;
  j["sigma"] = sigma;
  j["mean_iterations"] = mean_iterations;
  j["max_iterations"] = max_iterations;
  nlohmann::json hists = nlohmann::json::array();
  for (const auto& row : histograms) {
    nlohmann::json hrow = nlohmann::json::array();
    for (const auto& h : row) {
      hrow.push_back({{"lo", h.lo}, {"hi", h.hi}, {"counts", h.counts}});
    }
    hists.push_back(hrow);
  }
  j["histograms"] = hists;
  return j;
}

}  // namespace gsfica
