#pragma once

#include <Eigen/Dense>
#include <nlohmann/json.hpp>
#include <vector>

namespace gsfica {

struct GainReport {
  Eigen::MatrixXd G;        // B_hat * H
  std::vector<int> sigma;   // sigma[i] = column paired with row i
  Eigen::VectorXd signs;    // sign(G(i, sigma[i]))
  double off_index = 0.0;   // sum of squared entries off the sigma-diagonal
  bool degenerate = false;  // a zero row made the alignment ambiguous

  nlohmann::json to_json() const;
};

// G = B_hat * H; the (i,j) entry is the relative presence of source j in the
// i-th recovered component.
Eigen::MatrixXd gain_matrix(const Eigen::MatrixXd& B_hat,
                            const Eigen::MatrixXd& H);

// Greedy assignment maximizing sum |G(i, sigma(i))|: repeatedly take the
// largest remaining |entry| and retire its row and column.
void align(const Eigen::MatrixXd& G, std::vector<int>& sigma,
           Eigen::VectorXd& signs, bool* degenerate = nullptr);

// Squared Frobenius norm of G with the sigma-diagonal zeroed.
double off_index(const Eigen::MatrixXd& G, const std::vector<int>& sigma);

GainReport gain_report(const Eigen::MatrixXd& B_hat, const Eigen::MatrixXd& H);

}  // namespace gsfica
