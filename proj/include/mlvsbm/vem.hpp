#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mlvsbm/clustering.hpp"
#include "mlvsbm/network.hpp"
#include "mlvsbm/params.hpp"

namespace mlvsbm {

/// Lower bound on responsibility entries; rows are re-normalized after
/// flooring so each row stays within 1e-10 of summing to 1.
inline constexpr double kTauFloor = 1e-9;

/// Connectivity estimates are clamped to [kAlphaClamp, 1 - kAlphaClamp]
/// to keep all logarithms finite inside the optimization.
inline constexpr double kAlphaClamp = 1e-9;

inline constexpr std::uint64_t kDefaultSeed = 42;

/// Mean-field responsibilities, one row-stochastic matrix per level.
struct VariationalState {
  Eigen::MatrixXd tau_ind;  // n_ind x q_ind
  Eigen::MatrixXd tau_org;  // n_org x q_org
};

struct FitOptions {
  int max_outer_iterations = 1000;
  double bound_rel_tolerance = 1e-6;
  int max_fixed_point_sweeps = 50;
  double fixed_point_tolerance = 1e-6;
  int n_random_restarts = 10;
  InitMethod init_method = InitMethod::spectral;
  std::uint64_t seed = kDefaultSeed;
  /// Row blend factor for the fixed-point updates; 1 applies each update in
  /// full, smaller values mix with the previous row.
  double damping = 1.0;
  /// Force equal gamma columns (structurally independent levels).
  bool constrained_independent_gamma = false;
  int jobs = 1;
};

void require_valid(const FitOptions& options);

struct FitResult {
  ModelParams params;
  VariationalState state;
  double bound = 0.0;
  std::vector<double> bound_trace;  // one entry per outer iteration, non-decreasing
  Assignments map_assignments;
  int n_iterations = 0;
  bool converged = false;
  double icl = std::numeric_limits<double>::quiet_NaN();  // set by model selection
  std::vector<std::string> warnings;
};

/// Unilevel fit, used on each level separately by the model search and as a
/// baseline in the prediction experiments.
struct SbmFit {
  int q = 1;
  Eigen::VectorXd pi;
  Eigen::MatrixXd alpha;
  Eigen::MatrixXd tau;
  double bound = 0.0;
  std::vector<double> bound_trace;
  std::vector<int> map_z;
  int n_iterations = 0;
  bool converged = false;
  double icl = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::string> warnings;
};

/// Optional starting point for fit(); hard labels or soft responsibilities.
struct InitSpec {
  std::optional<Assignments> hard;
  std::optional<VariationalState> soft;
  bool empty() const { return !hard && !soft; }
};

/// One-hot responsibilities from hard labels (exact 0/1 rows).
Eigen::MatrixXd one_hot(const std::vector<int>& labels, int q);

/// Row argmax with ties broken toward the lowest index.
std::vector<int> map_labels(const Eigen::MatrixXd& tau);

/// Joint log-likelihood of data and a hard clustering, observed dyads only.
/// Returns -infinity when a degenerate alpha entry (exactly 0 or 1) collides
/// with an opposing observation.
double complete_log_likelihood(const MultilevelNetwork& net, const ModelParams& params,
                               const Assignments& z);

/// Evidence lower bound: expected complete log-likelihood under the
/// mean-field distribution plus its entropy.
double variational_bound(const MultilevelNetwork& net, const ModelParams& params,
                         const VariationalState& state);

/// Log-likelihood with the memberships summed out by direct enumeration.
/// Guarded: requires q_ind^n_ind * q_org^n_org <= 1e7.
double exact_log_likelihood(const MultilevelNetwork& net, const ModelParams& params);

/// Unilevel analogues (pi over the level's own blocks, no mixing term).
double sbm_complete_log_likelihood(const Eigen::MatrixXd& x, const Eigen::MatrixXd& mask,
                                   bool directed, const Eigen::VectorXd& pi,
                                   const Eigen::MatrixXd& alpha, const std::vector<int>& z);
double sbm_variational_bound(const Eigen::MatrixXd& x, const Eigen::MatrixXd& mask,
                             bool directed, const Eigen::VectorXd& pi,
                             const Eigen::MatrixXd& alpha, const Eigen::MatrixXd& tau);

/// Closed-form maximizer of the bound in the model parameters at fixed
/// responsibilities. Estimates for blocks with exactly zero occupancy (or
/// block pairs with no observed dyads) fall back to the observed density
/// (uniform column for gamma) and are reported through `warnings`.
ModelParams m_step(const MultilevelNetwork& net, const VariationalState& state,
                   bool constrained_independent_gamma = false,
                   std::vector<std::string>* warnings = nullptr);

/// Fixed-point sweeps over the responsibility rows (organization level first,
/// then individuals, sequentially within each level) until the largest row
/// change falls below fixed_point_tolerance or the sweep budget is spent.
VariationalState ve_step(const MultilevelNetwork& net, const ModelParams& params,
                         const VariationalState& state, const FitOptions& options = {});

/// Sup-norm residual of the responsibility fixed-point equations; small at a
/// converged fit.
double fixed_point_residual(const MultilevelNetwork& net, const ModelParams& params,
                            const VariationalState& state);

/// Alternating maximization of the bound from one or more initializations;
/// returns the restart with the best final bound (ties: lowest restart
/// index). bound_trace holds the bound after every outer iteration, starting
/// with the initial point.
FitResult fit(const MultilevelNetwork& net, int q_ind, int q_org,
              const FitOptions& options = {}, const InitSpec& init = {});

/// Unilevel variational EM on a single adjacency matrix.
SbmFit fit_sbm(const Eigen::MatrixXd& x, const Eigen::MatrixXd& mask, bool directed,
               int q, const FitOptions& options = {},
               const std::optional<std::vector<int>>& init_labels = std::nullopt,
               const std::optional<Eigen::MatrixXd>& init_tau = std::nullopt);

}  // namespace mlvsbm
