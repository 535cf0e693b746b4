#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <sys/wait.h>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>

#include "gsfica/montecarlo.hpp"
#include "gsfica/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string bin() {
  const char* b = std::getenv("GSFICA_BIN");
  REQUIRE_MESSAGE(b != nullptr, "GSFICA_BIN must point at the CLI binary");
  return b;
}

int run(const std::string& args) {
  const int status = std::system((bin() + " " + args + " > /dev/null 2>&1").c_str());
  return WEXITSTATUS(status);
}

fs::path scratch() {
  const fs::path p = fs::temp_directory_path() / "gsfica_cli_test";
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Two-channel Uniform + Laplace mixture written as CSV (rows = samples).
fs::path write_mixture_csv(long n, std::uint64_t seed) {
  const auto uni = gsfica::SourceSpec::uniform();
  const auto lap = gsfica::SourceSpec::laplace();
  const auto u = uni.sample(static_cast<std::size_t>(n), seed);
  const auto l = lap.sample(static_cast<std::size_t>(n), seed + 1);
  const fs::path path = scratch() / "mix.csv";
  std::ofstream out(path);
  for (long t = 0; t < n; ++t) {
    // H = [[2, 1], [1, 1]]
    const double s0 = u[static_cast<std::size_t>(t)];
    const double s1 = l[static_cast<std::size_t>(t)];
    out << 2.0 * s0 + s1 << ',' << s0 + s1 << '\n';
  }
  return path;
}

}  // namespace

TEST_CASE("version flag") { CHECK(run("--version") == 0); }

TEST_CASE("separate recovers a 2-channel mixture") {
  const fs::path data = write_mixture_csv(20000, 77);
  const fs::path out = scratch() / "sep.json";
  CHECK(run("separate " + data.string() + " --nonlinearities kurtosis --out " +
            out.string()) == 0);
  const json j = json::parse(slurp(out));
  REQUIRE(j.at("converged").get<bool>());
  Eigen::MatrixXd B(2, 2), H(2, 2);
  for (int i = 0; i < 2; ++i) {
    for (int c = 0; c < 2; ++c) B(i, c) = j.at("B")[i][c].get<double>();
  }
  H << 2, 1, 1, 1;
  const auto rep = gsfica::gain_report(B, H);
  CHECK(rep.off_index < 0.0025);  // entries within 0.05 of a signed permutation
  for (int i = 0; i < 2; ++i) {
    CHECK(std::abs(std::abs(rep.G(i, rep.sigma[i])) - 1.0) < 0.05);
  }
  CHECK(fs::exists(out.string() + ".manifest.json"));
}

TEST_CASE("malformed CSV exits with code 2") {
  const fs::path bad = scratch() / "bad.csv";
  std::ofstream(bad) << "1.0,2.0\n1.0,oops\n";
  CHECK(run("separate " + bad.string()) == 2);
  CHECK(run("separate /nonexistent.csv") == 2);
}

TEST_CASE("iteration cap is data, not failure") {
  const fs::path data = write_mixture_csv(2000, 5);
  const fs::path out = scratch() / "capped.json";
  CHECK(run("separate " + data.string() +
            " --nonlinearities kurtosis --max-iter 1 --out " + out.string()) ==
        0);
  const json j = json::parse(slurp(out));
  CHECK_FALSE(j.at("converged").get<bool>());
}

TEST_CASE("predict reports the classic alpha values") {
  const fs::path cfg = scratch() / "predict.json";
  std::ofstream(cfg) << R"({
    "sources": [{"kind":"laplace"}, {"kind":"gg","alpha":4}, {"kind":"uniform"}],
    "nonlinearities": ["gauss", "tanh", "kurtosis"]
  })";
  const fs::path out = scratch() / "prediction.json";
  CHECK(run("predict " + cfg.string() + " --out " + out.string()) == 0);
  const json j = json::parse(slurp(out));
  CHECK(j["functionals"]["alpha"][0].get<double>() == doctest::Approx(0.211).epsilon(0.01));
  CHECK(j["functionals"]["alpha"][1].get<double>() == doctest::Approx(-0.077).epsilon(0.01));
  CHECK(j["functionals"]["alpha"][2].get<double>() == doctest::Approx(1.2).epsilon(1e-6));
  CHECK(j["signs"] == json::array({1.0, -1.0, 1.0}));
  CHECK(j.contains("variance"));
  CHECK(j.contains("crb"));
}

TEST_CASE("simulate writes deterministic outputs") {
  const fs::path cfg = scratch() / "sim.json";
  std::ofstream(cfg) << R"({
    "sources": [{"kind":"bimod","mu1":3,"mu2":-0.3}, {"kind":"gg","alpha":4}, {"kind":"laplace"}],
    "nonlinearities": ["kurtosis", "gauss", "tanh"],
    "H": [[1,0,0],[0,1,0],[0,0,1]],
    "N": 1000, "trials": 6, "base_seed": 9
  })";
  const fs::path p1 = scratch() / "simA";
  const fs::path p2 = scratch() / "simB";
  CHECK(run("simulate " + cfg.string() + " --out " + p1.string()) == 0);
  CHECK(run("simulate " + cfg.string() + " --out " + p2.string()) == 0);
  CHECK(slurp(p1.string() + ".json") == slurp(p2.string() + ".json"));
  CHECK(fs::exists(p1.string() + "_hist_0_1.csv"));
}

TEST_CASE("surface emits the grid with the origin at identity") {
  const fs::path cfg = scratch() / "surf.json";
  std::ofstream(cfg) << R"({
    "sources": [{"kind":"uniform"}, {"kind":"uniform"}, {"kind":"laplace"}],
    "nonlinearities": ["kurtosis", "kurtosis", "kurtosis"],
    "N": 5000, "seed": 3,
    "phi": {"min": -0.2, "max": 0.2, "count": 3},
    "chi": {"min": -0.2, "max": 0.2, "count": 3}
  })";
  const fs::path out = scratch() / "surface.csv";
  CHECK(run("surface " + cfg.string() + " --out " + out.string()) == 0);
  const std::string text = slurp(out);
  CHECK(text.rfind("phi,chi,J1,J2", 0) == 0);
  // header + 9 grid rows
  CHECK(std::count(text.begin(), text.end(), '\n') == 10);
}

TEST_CASE("invalid config exits with code 2") {
  const fs::path cfg = scratch() / "broken.json";
  std::ofstream(cfg) << "{ not json";
  CHECK(run("predict " + cfg.string()) == 2);
  CHECK(run("simulate " + cfg.string()) == 2);
}
