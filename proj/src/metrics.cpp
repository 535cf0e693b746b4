#include "gsfica/metrics.hpp"

#include <cmath>

#include "gsfica/errors.hpp"

namespace gsfica {

Eigen::MatrixXd gain_matrix(const Eigen::MatrixXd& B_hat,
                            const Eigen::MatrixXd& H) {
  if (B_hat.rows() != B_hat.cols() || H.rows() != H.cols() ||
      B_hat.cols() != H.rows()) {
    throw ParameterError("gain_matrix: dimension mismatch");
  }
  return B_hat * H;
}

void align(const Eigen::MatrixXd& G, std::vector<int>& sigma,
           Eigen::VectorXd& signs, bool* degenerate) {
  const Eigen::Index d = G.rows();
  sigma.assign(static_cast<std::size_t>(d), -1);
  signs = Eigen::VectorXd::Ones(d);
  if (degenerate) *degenerate = false;
  std::vector<bool> row_done(static_cast<std::size_t>(d), false);
  std::vector<bool> col_done(static_cast<std::size_t>(d), false);
  for (Eigen::Index pick = 0; pick < d; ++pick) {
    double best = -1.0;
    Eigen::Index bi = -1, bj = -1;
    for (Eigen::Index i = 0; i < d; ++i) {
      if (row_done[static_cast<std::size_t>(i)]) continue;
      for (Eigen::Index j = 0; j < d; ++j) {
        if (col_done[static_cast<std::size_t>(j)]) continue;
        const double v = std::abs(G(i, j));
        if (v > best) {
          best = v;
          bi = i;
          bj = j;
        }
      }
    }
    if (best <= 0.0 && degenerate) *degenerate = true;
    sigma[static_cast<std::size_t>(bi)] = static_cast<int>(bj);
    signs[bi] = G(bi, bj) >= 0.0 ? 1.0 : -1.0;
    row_done[static_cast<std::size_t>(bi)] = true;
    col_done[static_cast<std::size_t>(bj)] = true;
  }
}

double off_index(const Eigen::MatrixXd& G, const std::vector<int>& sigma) {
  const Eigen::Index d = G.rows();
  if (static_cast<Eigen::Index>(sigma.size()) != d) {
    throw ParameterError("off_index: sigma size mismatch");
  }
  std::vector<bool> seen(static_cast<std::size_t>(d), false);
  for (int s : sigma) {
    if (s < 0 || s >= d || seen[static_cast<std::size_t>(s)]) {
      throw ParameterError("off_index: sigma is not a permutation");
    }
    seen[static_cast<std::size_t>(s)] = true;
  }
  double total = G.squaredNorm();
  for (Eigen::Index i = 0; i < d; ++i) {
    const double gii = G(i, sigma[static_cast<std::size_t>(i)]);
    total -= gii * gii;
  }
  return std::max(total, 0.0);
}

GainReport gain_report(const Eigen::MatrixXd& B_hat, const Eigen::MatrixXd& H) {
  GainReport rep;
  rep.G = gain_matrix(B_hat, H);
  align(rep.G, rep.sigma, rep.signs, &rep.degenerate);
  rep.off_index = off_index(rep.G, rep.sigma);
  return rep;
}

nlohmann::json GainReport::to_json() const {
  nlohmann::json j;
  j["G"] = nlohmann::json::array();
  for (Eigen::Index i = 0; i < G.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < G.cols(); ++c) row.push_back(G(i, c));
    j["G"].push_back(row);
  }
  j["sigma"] = sigma;
  j["signs"] = std::vector<double>(signs.data(), signs.data() + signs.size());
  j["off_index"] = off_index;
  if (degenerate) j["alignment_degenerate"] = true;
  return j;
}

}  // namespace gsfica
