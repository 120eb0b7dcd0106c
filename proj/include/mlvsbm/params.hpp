#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mlvsbm {

/// Generative parameters of the two-level block model: block proportions of
/// the organization level, the column-stochastic membership mixing matrix
/// linking the two levels, and one connectivity matrix per level.
struct ModelParams {
  int q_ind = 1;
  int q_org = 1;
  Eigen::VectorXd pi_org;     // length q_org, sums to 1
  Eigen::MatrixXd gamma;      // q_ind x q_org, each column sums to 1
  Eigen::MatrixXd alpha_ind;  // q_ind x q_ind, entries in [0,1]
  Eigen::MatrixXd alpha_org;  // q_org x q_org
  bool directed_ind = false;
  bool directed_org = false;
};

/// Empty result means the parameters satisfy all invariants.
std::vector<std::string> check_params(const ModelParams& params);

void require_valid(const ModelParams& params);

/// Hard block memberships, 0-based.
struct Assignments {
  std::vector<int> z_ind;
  std::vector<int> z_org;
};

enum class Topology { assortative, disassortative, core_periphery };

Topology topology_from_string(const std::string& s);
std::string to_string(Topology t);

/// Connectivity pattern scaled by the density d, with contrast eps >= 1.
/// assortative: eps on the diagonal, 1 elsewhere. disassortative: 1 on the
/// diagonal, eps elsewhere. core_periphery: eps on the anti-diagonal band
/// i+j < q-1 (0-based), 1 elsewhere, block 0 acting as the core.
Eigen::MatrixXd topology_alpha(Topology kind, double d, double eps, int q);

/// Square mixing matrix with delta on the diagonal and (1-delta)/(q-1) off
/// it; delta = 1/q makes the levels independent, delta = 1 ties them
/// deterministically.
Eigen::MatrixXd gamma_from_delta(double delta, int q);

/// Checks the coefficient-separation condition used for identifiability:
/// the entries of alpha_ind * gamma * pi_org must be pairwise distinct, and
/// likewise the entries of alpha_org * pi_org.
struct IdentifiabilityReport {
  bool ok = false;
  double min_gap_ind = 0.0;
  double min_gap_org = 0.0;
};

IdentifiabilityReport identifiability_diagnostic(const ModelParams& params);

}  // namespace mlvsbm
