// gsfica: blind source separation via generalized symmetric FastICA.
//
// Commands:
//   separate  — run the fixed-point engine on CSV data (rows = samples)
//   predict   — closed-form asymptotic variances, CRB, and sign patterns
//   simulate  — seeded Monte Carlo experiments with theoretical overlays
//   surface   — (phi, chi) contrast-function grid for 3-source setups

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "gsfica/asymptotics.hpp"
#include "gsfica/errors.hpp"
#include "gsfica/fastica.hpp"
#include "gsfica/metrics.hpp"
#include "gsfica/montecarlo.hpp"
#include "gsfica/preprocess.hpp"
#include "gsfica/rng.hpp"
#include "gsfica/sources.hpp"

namespace {

using nlohmann::json;

constexpr const char* kVersion = "1.0.0";

// Shortest round-trip decimal representation, identical across platforms.
std::string fmt(double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, p);
}

json matrix_json(const Eigen::MatrixXd& M) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(row);
  }
  return rows;
}

json vector_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

// CSV with rows = samples, columns = channels; transposed to d x N.
Eigen::MatrixXd read_csv_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw gsfica::ParameterError("cannot open data file: " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        const double v = std::stod(cell, &used);
        while (used < cell.size() &&
               std::isspace(static_cast<unsigned char>(cell[used]))) {
          ++used;
        }
        if (used != cell.size()) throw std::invalid_argument(cell);
        row.push_back(v);
      } catch (const std::exception&) {
        throw gsfica::ParameterError("malformed CSV value \"" + cell +
                                     "\" at row " + std::to_string(lineno) +
                                     " of " + path);
      }
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw gsfica::ParameterError(
          "CSV row " + std::to_string(lineno) + " has " +
          std::to_string(row.size()) + " fields, expected " +
          std::to_string(rows.front().size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw gsfica::ParameterError("empty CSV file: " + path);
  const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index d = static_cast<Eigen::Index>(rows.front().size());
  Eigen::MatrixXd Y(d, n);
  for (Eigen::Index t = 0; t < n; ++t) {
    for (Eigen::Index i = 0; i < d; ++i) {
      Y(i, t) = rows[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)];
    }
  }
  return Y;
}

void write_csv_matrix_samples(const std::string& path,
                              const Eigen::MatrixXd& M) {
  std::ofstream out(path);
  if (!out) throw gsfica::ParameterError("cannot write: " + path);
  for (Eigen::Index t = 0; t < M.cols(); ++t) {
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
      if (i) out << ',';
      out << fmt(M(i, t));
    }
    out << '\n';
  }
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw gsfica::ParameterError("cannot write: " + path);
  out << text;
}

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw gsfica::ParameterError("cannot open config file: " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw gsfica::ParameterError("invalid JSON in " + path + ": " + e.what());
  }
}

void write_manifest(const std::string& command, const json& config,
                    const std::vector<std::string>& outputs,
                    const std::vector<std::uint64_t>& seeds,
                    double duration_ms, const std::string& path) {
  json m;
  m["command"] = command;
  m["config"] = config;
  m["version"] = kVersion;
  m["seeds"] = seeds;
  m["outputs"] = outputs;
  m["duration_ms"] = duration_ms;
  write_text(path, m.dump(2) + "\n");
}

gsfica::Nonlinearity nl_from_name(const std::string& name) {
  if (name == "kurtosis" || name == "kurt") return gsfica::Nonlinearity::kurtosis();
  if (name == "gauss") return gsfica::Nonlinearity::gauss();
  if (name == "tanh") return gsfica::Nonlinearity::tanh();
  throw gsfica::ParameterError("unknown nonlinearity: " + name +
                               " (expected kurtosis|gauss|tanh)");
}

gsfica::Centering centering_from_name(const std::string& s) {
  if (s == "empirical") return gsfica::Centering::Empirical;
  if (s == "exact") return gsfica::Centering::Exact;
  if (s == "none") return gsfica::Centering::None;
  throw gsfica::ParameterError("unknown centering: " + s);
}

Eigen::MatrixXd random_orthogonal(Eigen::Index d, std::uint64_t seed) {
  gsfica::Xoshiro256pp rng(seed);
  const gsfica::SourceSpec normal = gsfica::SourceSpec::gaussian();
  Eigen::MatrixXd M(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) M(i, j) = normal.sample_one(rng);
  }
  return gsfica::symmetric_orthogonalize(M);
}

struct GridSpec {
  double min = 0.0, max = 0.0;
  int count = 0;
  std::vector<double> points() const {
    std::vector<double> out(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
      out[static_cast<std::size_t>(k)] =
          count == 1 ? min : min + (max - min) * k / (count - 1);
    }
    return out;
  }
};

GridSpec grid_from_json(const json& j) {
  GridSpec g;
  g.min = j.at("min").get<double>();
  g.max = j.at("max").get<double>();
  g.count = j.at("count").get<int>();
  if (g.count < 1 || g.max < g.min) {
    throw gsfica::ParameterError("grid requires count >= 1 and max >= min");
  }
  return g;
}

int cmd_separate(const std::string& data_path, const std::string& nl_arg,
                 const std::string& centering_arg, const std::string& mean_arg,
                 const std::string& algorithm_arg, double tol, int max_iter,
                 std::uint64_t seed, bool random_start, const std::string& out,
                 const std::string& sources_out) {
  const auto t0 = std::chrono::steady_clock::now();
  const Eigen::MatrixXd Y = read_csv_matrix(data_path);
  const Eigen::Index d = Y.rows();

  gsfica::NonlinearityList nls;
  {
    std::stringstream ss(nl_arg);
    std::string name;
    while (std::getline(ss, name, ',')) nls.push_back(nl_from_name(name));
  }
  if (nls.size() == 1) nls.assign(static_cast<std::size_t>(d), nls.front());
  if (static_cast<Eigen::Index>(nls.size()) != d) {
    throw gsfica::ParameterError(
        "need 1 or d nonlinearities; data has d = " + std::to_string(d));
  }

  const gsfica::Centering centering = centering_from_name(centering_arg);
  std::optional<Eigen::VectorXd> exact_mean;
  if (centering == gsfica::Centering::Exact) {
    if (mean_arg.empty()) {
      throw gsfica::ParameterError("--centering exact requires --mean");
    }
    Eigen::VectorXd mu(d);
    std::stringstream ss(mean_arg);
    std::string cell;
    Eigen::Index k = 0;
    while (std::getline(ss, cell, ',')) {
      if (k >= d) throw gsfica::ParameterError("--mean has too many entries");
      mu[k++] = std::stod(cell);
    }
    if (k != d) throw gsfica::ParameterError("--mean needs d entries");
    exact_mean = mu;
  }

  const gsfica::StandardizedData data =
      gsfica::standardize(Y, centering, exact_mean);

  gsfica::IterationConfig icfg;
  icfg.tol = tol;
  icfg.max_iter = max_iter;
  icfg.nls = nls;
  icfg.W0 = random_start ? random_orthogonal(d, seed)
                         : Eigen::MatrixXd::Identity(d, d);

  gsfica::SeparationResult res;
  if (algorithm_arg == "one_unit") {
    res = gsfica::one_unit(data, icfg);
  } else if (algorithm_arg == "symmetric") {
    res = gsfica::symmetric(data, nls.front(), icfg.W0, tol, max_iter);
  } else if (algorithm_arg == "generalized_symmetric") {
    res = gsfica::generalized_symmetric(data, icfg);
  } else {
    throw gsfica::ParameterError("unknown algorithm: " + algorithm_arg);
  }

  json j;
  j["B"] = matrix_json(res.B);
  j["W"] = matrix_json(res.W);
  j["iterations"] = res.iterations;
  j["converged"] = res.converged;
  j["final_delta"] = res.final_delta;
  j["sign_vector"] = vector_json(res.sign_vector);
  j["symmetry_defect"] =
      gsfica::symmetry_defect(res.W, data.X, nls, res.sign_vector);
  if (!res.diagnostic.empty()) j["diagnostic"] = res.diagnostic;
  j["mean_used"] = vector_json(data.mean_used);
  write_text(out, j.dump(2) + "\n");

  std::vector<std::string> outputs{out};
  if (!sources_out.empty()) {
    write_csv_matrix_samples(sources_out, res.W * data.X);
    outputs.push_back(sources_out);
  }

  json config;
  config["data"] = data_path;
  config["nonlinearities"] = nl_arg;
  config["centering"] = centering_arg;
  config["algorithm"] = algorithm_arg;
  config["tol"] = tol;
  config["max_iter"] = max_iter;
  if (random_start) config["seed"] = seed;
  const double ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
  write_manifest("separate", config, outputs,
                 random_start ? std::vector<std::uint64_t>{seed}
                              : std::vector<std::uint64_t>{},
                 ms, out + ".manifest.json");
  std::cout << (res.converged ? "converged" : "did not converge") << " in "
            << res.iterations << " iterations (final delta "
            << fmt(res.final_delta) << ")\n";
  return 0;
}

int cmd_predict(const std::string& config_path, const std::string& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const json cfg = load_json(config_path);
  std::vector<gsfica::SourceSpec> specs;
  for (const auto& s : cfg.at("sources")) {
    specs.push_back(gsfica::SourceSpec::from_json(s));
  }
  gsfica::NonlinearityList nls;
  for (const auto& n : cfg.at("nonlinearities")) {
    nls.push_back(gsfica::Nonlinearity::from_json(n));
  }
  const int d = static_cast<int>(nls.size());
  gsfica::Permutation sigma(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) sigma[static_cast<std::size_t>(i)] = i;
  if (cfg.contains("sigma")) {
    sigma = cfg.at("sigma").get<std::vector<int>>();
  }

  const gsfica::MomentFunctionals f =
      gsfica::moment_functionals(specs, nls, sigma);

  json j;
  j["sigma"] = sigma;
  j["functionals"] = {
      {"alpha", vector_json(f.alpha)}, {"beta", vector_json(f.beta)},
      {"gamma", vector_json(f.gamma)}, {"eta", vector_json(f.eta)},
      {"tau", vector_json(f.tau)},     {"kappa", vector_json(f.kappa)},
      {"third_moment", vector_json(f.third)},
      {"lambda", matrix_json(f.lambda)},
  };
  try {
    j["signs"] = vector_json(gsfica::local_contrast_signs(f));
  } catch (const gsfica::DegeneratePairingError& e) {
    j["signs_error"] = e.what();
  }

  const std::vector<std::pair<std::string, gsfica::Variant>> variants = {
      {"generalized_empirical_centering",
       gsfica::Variant::GeneralizedEmpiricalCentering},
      {"exact_centering", gsfica::Variant::ExactCentering},
      {"symmetric_legacy", gsfica::Variant::SymmetricLegacy},
      {"one_unit", gsfica::Variant::OneUnit},
  };
  for (const auto& [name, variant] : variants) {
    json V = json::array();
    for (int i = 0; i < d; ++i) {
      json row = json::array();
      for (int c = 0; c < d; ++c) {
        try {
          row.push_back(gsfica::gain_variance(f, variant, i, c));
        } catch (const gsfica::Error&) {
          row.push_back(nullptr);
        }
      }
      V.push_back(row);
    }
    j["variance"][name] = V;
  }

  json crb = json::array();
  for (int i = 0; i < d; ++i) {
    json row = json::array();
    for (int c = 0; c < d; ++c) {
      if (i == c) {
        row.push_back(nullptr);
        continue;
      }
      try {
        row.push_back(gsfica::crb_gain(f.kappa[i], f.kappa[c]));
      } catch (const gsfica::Error&) {
        row.push_back(nullptr);
      }
    }
    crb.push_back(row);
  }
  j["crb"] = crb;
  write_text(out, j.dump(2) + "\n");
  const double ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
  write_manifest("predict", cfg, {out}, {}, ms, out + ".manifest.json");
  std::cout << "wrote " << out << "\n";
  return 0;
}

int cmd_simulate(const std::string& config_path, const std::string& prefix) {
  const auto t0 = std::chrono::steady_clock::now();
  const json raw = load_json(config_path);
  std::vector<std::string> outputs;

  std::vector<long> sweep;
  if (raw.contains("N_sweep")) {
    sweep = raw.at("N_sweep").get<std::vector<long>>();
  }

  auto run_one = [&](long n_override) {
    json cj = raw;
    cj.erase("N_sweep");
    if (n_override > 0) cj["N"] = n_override;
    const gsfica::ExperimentConfig cfg = gsfica::ExperimentConfig::from_json(cj);
    return gsfica::run_experiment(cfg);
  };

  if (sweep.empty()) {
    const gsfica::Aggregate agg = run_one(-1);
    const std::string agg_path = prefix + ".json";
    write_text(agg_path, agg.to_json().dump(2) + "\n");
    outputs.push_back(agg_path);
    // Per-entry histogram curves: x = bin center, empirical density,
    // theoretical normal density with the predicted variance.
    const int d = static_cast<int>(agg.predicted.rows());
    const long used = agg.trials - agg.failures;
    for (int i = 0; i < d; ++i) {
      for (int c = 0; c < d; ++c) {
        const gsfica::Histogram& h =
            agg.histograms[static_cast<std::size_t>(i)]
                          [static_cast<std::size_t>(c)];
        const double width =
            (h.hi - h.lo) / static_cast<double>(h.counts.size());
        const double var = agg.predicted(i, c);
        std::ostringstream csv;
        csv << "x,empirical,theoretical\n";
        for (std::size_t b = 0; b < h.counts.size(); ++b) {
          const double x = h.lo + (static_cast<double>(b) + 0.5) * width;
          const double emp =
              used > 0 ? static_cast<double>(h.counts[b]) /
                             (static_cast<double>(used) * width)
                       : 0.0;
          const double theo =
              std::isfinite(var) && var > 0.0
                  ? std::exp(-0.5 * x * x / var) /
                        std::sqrt(2.0 * M_PI * var)
                  : 0.0;
          csv << fmt(x) << ',' << fmt(emp) << ',' << fmt(theo) << '\n';
        }
        const std::string path = prefix + "_hist_" + std::to_string(i) + "_" +
                                 std::to_string(c) + ".csv";
        write_text(path, csv.str());
        outputs.push_back(path);
      }
    }
  } else {
    std::ostringstream csv;
    csv << "x,empirical,theoretical\n";
    json sweep_json = json::array();
    for (long n : sweep) {
      const gsfica::Aggregate agg = run_one(n);
      csv << n << ',' << fmt(agg.mean_scaled_off) << ','
          << fmt(agg.predicted_off) << '\n';
      json point = agg.to_json();
      point["N"] = n;
      point.erase("histograms");
      sweep_json.push_back(point);
    }
    const std::string csv_path = prefix + "_sweep.csv";
    write_text(csv_path, csv.str());
    outputs.push_back(csv_path);
    const std::string json_path = prefix + ".json";
    write_text(json_path, sweep_json.dump(2) + "\n");
    outputs.push_back(json_path);
  }

  const double ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
  write_manifest("simulate", raw, outputs,
                 {raw.value("base_seed", std::uint64_t{0})}, ms,
                 prefix + ".manifest.json");
  std::cout << "wrote " << outputs.size() << " file(s) under " << prefix
            << "*\n";
  return 0;
}

int cmd_surface(const std::string& config_path, const std::string& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const json cfg = load_json(config_path);
  std::vector<gsfica::SourceSpec> specs;
  for (const auto& s : cfg.at("sources")) {
    specs.push_back(gsfica::SourceSpec::from_json(s));
  }
  gsfica::NonlinearityList nls;
  for (const auto& n : cfg.at("nonlinearities")) {
    nls.push_back(gsfica::Nonlinearity::from_json(n));
  }
  if (specs.size() != 3 || nls.size() != 3) {
    throw gsfica::UnsupportedDimensionError(
        "surface requires exactly 3 sources and 3 nonlinearities");
  }
  const long n = cfg.at("N").get<long>();
  const std::uint64_t seed = cfg.value("seed", std::uint64_t{0});
  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(3, 3);
  const GridSpec phi = grid_from_json(cfg.at("phi"));
  const GridSpec chi = grid_from_json(cfg.at("chi"));

  Eigen::MatrixXd S(3, n);
  for (int i = 0; i < 3; ++i) {
    const auto draws = specs[static_cast<std::size_t>(i)].sample(
        static_cast<std::size_t>(n),
        gsfica::derive_seed(seed, static_cast<std::uint64_t>(i)));
    for (long t = 0; t < n; ++t) S(i, t) = draws[static_cast<std::size_t>(t)];
  }
  const gsfica::StandardizedData data =
      gsfica::standardize(H * S, gsfica::Centering::Empirical, std::nullopt);

  gsfica::Permutation sigma{0, 1, 2};
  const gsfica::MomentFunctionals f =
      gsfica::moment_functionals(specs, nls, sigma);
  const Eigen::VectorXd signs = gsfica::local_contrast_signs(f);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(3);

  const std::vector<double> phis = phi.points();
  const std::vector<double> chis = chi.points();
  const Eigen::MatrixXd J1 =
      gsfica::contrast_surface(phis, chis, data.X, nls, ones);
  const Eigen::MatrixXd J2 =
      gsfica::contrast_surface(phis, chis, data.X, nls, signs);

  std::ostringstream csv;
  csv << "phi,chi,J1,J2\n";
  for (std::size_t a = 0; a < phis.size(); ++a) {
    for (std::size_t b = 0; b < chis.size(); ++b) {
      csv << fmt(phis[a]) << ',' << fmt(chis[b]) << ','
          << fmt(J1(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)))
          << ','
          << fmt(J2(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)))
          << '\n';
    }
  }
  write_text(out, csv.str());
  const double ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
  write_manifest("surface", cfg, {out}, {seed}, ms, out + ".manifest.json");
  std::cout << "wrote " << out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generalized symmetric FastICA blind source separation"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  // separate
  std::string sep_data, sep_nls = "tanh", sep_centering = "empirical";
  std::string sep_mean, sep_algorithm = "generalized_symmetric";
  std::string sep_out = "separation.json", sep_sources_out;
  double sep_tol = 1e-9;
  int sep_max_iter = 1000;
  std::uint64_t sep_seed = 0;
  auto* sep = app.add_subcommand("separate", "Separate CSV data (rows = samples)");
  sep->add_option("data", sep_data, "Input CSV")->required();
  sep->add_option("--nonlinearities", sep_nls,
                  "Comma list: kurtosis|gauss|tanh (1 or d entries)");
  sep->add_option("--centering", sep_centering, "empirical|exact|none");
  sep->add_option("--mean", sep_mean, "True mean (comma list, exact centering)");
  sep->add_option("--algorithm", sep_algorithm,
                  "one_unit|symmetric|generalized_symmetric");
  sep->add_option("--tol", sep_tol, "Convergence tolerance");
  sep->add_option("--max-iter", sep_max_iter, "Iteration cap");
  auto* seed_opt =
      sep->add_option("--seed", sep_seed, "Random orthogonal start seed");
  sep->add_option("--out", sep_out, "Output JSON path");
  sep->add_option("--sources-out", sep_sources_out, "Recovered sources CSV");

  // predict
  std::string pre_config, pre_out = "prediction.json";
  auto* pre = app.add_subcommand("predict", "Asymptotic variance report");
  pre->add_option("config", pre_config, "Config JSON")->required();
  pre->add_option("--out", pre_out, "Output JSON path");

  // simulate
  std::string sim_config, sim_prefix = "experiment";
  auto* sim = app.add_subcommand("simulate", "Monte Carlo experiment");
  sim->add_option("config", sim_config, "Config JSON")->required();
  sim->add_option("--out", sim_prefix, "Output path prefix");

  // surface
  std::string sur_config, sur_out = "surface.csv";
  auto* sur = app.add_subcommand("surface", "Contrast surface grid");
  sur->add_option("config", sur_config, "Config JSON")->required();
  sur->add_option("--out", sur_out, "Output CSV path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sep->parsed()) {
      return cmd_separate(sep_data, sep_nls, sep_centering, sep_mean,
                          sep_algorithm, sep_tol, sep_max_iter, sep_seed,
                          seed_opt->count() > 0, sep_out, sep_sources_out);
    }
    if (pre->parsed()) return cmd_predict(pre_config, pre_out);
    if (sim->parsed()) return cmd_simulate(sim_config, sim_prefix);
    if (sur->parsed()) return cmd_surface(sur_config, sur_out);
  } catch (const gsfica::NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const gsfica::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
