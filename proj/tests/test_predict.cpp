#include <doctest.h>

#include <cmath>
#include <set>

#include "mlvsbm/generator.hpp"
#include "mlvsbm/predict.hpp"

using namespace mlvsbm;

namespace {

MultilevelNetwork sample_design(double delta, double d, double eps, int n_ind, int n_org,
                                std::uint64_t seed, Assignments* truth = nullptr) {
  ModelParams p;
  p.q_ind = 3;
  p.q_org = 3;
  p.pi_org = Eigen::VectorXd::Constant(3, 1.0 / 3.0);
  p.gamma = gamma_from_delta(delta, 3);
  p.alpha_ind = topology_alpha(Topology::assortative, d, eps, 3);
  p.alpha_org = topology_alpha(Topology::assortative, 0.1, 5.0, 3);
  const auto aff = sample_affiliation(n_ind, n_org, SizeLaw::power_law, 2.0,
                                      Rng(seed).split(1).seed());
  auto [net, z] = sample_network(p, aff, Rng(seed).split(2).seed());
  if (truth != nullptr) *truth = z;
  return net;
}

FitResult fake_fit(const Eigen::MatrixXd& tau_ind, const Eigen::MatrixXd& alpha_ind,
                   int n_org) {
  FitResult f;
  f.params.q_ind = (int)tau_ind.cols();
  f.params.q_org = 1;
  f.params.pi_org = Eigen::VectorXd::Ones(1);
  f.params.gamma = Eigen::MatrixXd::Constant(f.params.q_ind, 1, 1.0 / f.params.q_ind);
  f.params.alpha_ind = alpha_ind;
  f.params.alpha_org = Eigen::MatrixXd::Constant(1, 1, 0.5);
  f.state.tau_ind = tau_ind;
  f.state.tau_org = Eigen::MatrixXd::Ones(n_org, 1);
  f.map_assignments.z_ind = map_labels(tau_ind);
  f.map_assignments.z_org.assign((std::size_t)n_org, 0);
  return f;
}

}  // namespace

TEST_CASE("one-hot responsibilities score exactly the block probability") {
  const auto net = sample_design(0.8, 0.1, 5.0, 6, 2, 1);
  Eigen::MatrixXd tau = Eigen::MatrixXd::Zero(6, 2);
  for (int i = 0; i < 6; ++i) tau(i, i % 2) = 1.0;
  Eigen::MatrixXd alpha(2, 2);
  alpha << 0.7, 0.2, 0.2, 0.4;
  const auto f = fake_fit(tau, alpha, 2);
  const auto scores = dyad_probabilities(net, f, Level::ind, TargetSet::all_offdiag);
  for (const auto& [i, j, s] : scores.scores) {
    CHECK(s == doctest::Approx(alpha(i % 2, j % 2)).epsilon(1e-12));
  }
}

TEST_CASE("uniform responsibilities average the connectivities") {
  const auto net = sample_design(0.8, 0.1, 5.0, 5, 2, 2);
  Eigen::MatrixXd tau = Eigen::MatrixXd::Constant(5, 2, 0.5);
  Eigen::MatrixXd alpha(2, 2);
  alpha << 0.8, 0.4, 0.4, 0.2;
  const auto f = fake_fit(tau, alpha, 2);
  const auto scores = dyad_probabilities(net, f, Level::ind, TargetSet::all_offdiag);
  const double mean_alpha = alpha.sum() / 4.0;
  for (const auto& [i, j, s] : scores.scores) {
    CHECK(s == doctest::Approx(mean_alpha).epsilon(1e-12));
  }
}

TEST_CASE("scores are invariant under joint block permutation") {
  const auto net = sample_design(0.8, 0.1, 5.0, 6, 2, 3);
  Eigen::MatrixXd tau(6, 2);
  for (int i = 0; i < 6; ++i) {
    tau(i, 0) = 0.2 + 0.1 * i;
    tau(i, 1) = 1.0 - tau(i, 0);
  }
  Eigen::MatrixXd alpha(2, 2);
  alpha << 0.7, 0.3, 0.3, 0.1;
  const auto base = dyad_probabilities(net, fake_fit(tau, alpha, 2), Level::ind,
                                       TargetSet::all_offdiag);
  Eigen::MatrixXd tau_p(6, 2);
  tau_p.col(0) = tau.col(1);
  tau_p.col(1) = tau.col(0);
  Eigen::MatrixXd alpha_p(2, 2);
  alpha_p << alpha(1, 1), alpha(1, 0), alpha(0, 1), alpha(0, 0);
  const auto perm = dyad_probabilities(net, fake_fit(tau_p, alpha_p, 2), Level::ind,
                                       TargetSet::all_offdiag);
  for (std::size_t t = 0; t < base.scores.size(); ++t) {
    CHECK(std::get<2>(base.scores[t]) ==
          doctest::Approx(std::get<2>(perm.scores[t])).epsilon(1e-12));
  }
}

TEST_CASE("target sets pick the right dyads") {
  auto net = sample_design(0.8, 0.2, 4.0, 8, 3, 4);
  const auto masked = apply_mask(net, Level::ind, 0.2, MaskMode::dyads, 9);
  Eigen::MatrixXd tau = Eigen::MatrixXd::Constant(8, 2, 0.5);
  Eigen::MatrixXd alpha = Eigen::MatrixXd::Constant(2, 2, 0.3);
  const auto f = fake_fit(tau, alpha, 3);

  const auto on_masked = dyad_probabilities(masked.net, f, Level::ind, TargetSet::masked);
  std::set<std::pair<int, int>> held(masked.held_out.begin(), masked.held_out.end());
  CHECK(on_masked.scores.size() == held.size());
  for (const auto& [i, j, s] : on_masked.scores) CHECK(held.count({i, j}) == 1);

  const auto on_zeros = dyad_probabilities(masked.net, f, Level::ind, TargetSet::zeros);
  for (const auto& [i, j, s] : on_zeros.scores) {
    CHECK(masked.net.mask_ind(i, j) == 1.0);
    CHECK(masked.net.x_ind(i, j) == 0.0);
  }
}

TEST_CASE("empty target sets are rejected") {
  const auto net = sample_design(0.8, 0.1, 5.0, 6, 2, 5);
  Eigen::MatrixXd tau = Eigen::MatrixXd::Constant(6, 2, 0.5);
  Eigen::MatrixXd alpha = Eigen::MatrixXd::Constant(2, 2, 0.3);
  const auto f = fake_fit(tau, alpha, 2);
  CHECK_THROWS_AS(dyad_probabilities(net, f, Level::ind, TargetSet::masked),
                  ValidationError);
}

TEST_CASE("fitted scores average near the observed density") {
  Assignments truth;
  const auto net = sample_design(0.9, 0.1, 5.0, 120, 40, 6, &truth);
  FitOptions opts;
  opts.n_random_restarts = 3;
  const auto f = fit(net, 3, 3, opts);
  const auto scores = dyad_probabilities(net, f, Level::ind, TargetSet::all_offdiag);
  double mean = 0.0;
  for (const auto& [i, j, s] : scores.scores) mean += s;
  mean /= (double)scores.scores.size();
  CHECK(std::abs(mean - network_stats(net).density_ind) < 0.02);
}

TEST_CASE("experiment produces rows for every fraction, model and repeat") {
  const auto net = sample_design(0.9, 0.15, 5.0, 50, 16, 7);
  ExperimentOptions eo;
  eo.q_ind = 3;
  eo.q_org = 3;
  eo.q_sbm = 3;
  eo.fit.n_random_restarts = 2;
  const auto result = prediction_experiment(net, {0.0, 0.2}, MaskMode::dyads,
                                            {PredModel::mlvsbm, PredModel::sbm}, 3, 11, eo);
  CHECK(result.runs.size() == 2 * 3);  // fraction 0 dropped
  for (const auto& r : result.runs) {
    CHECK(r.fraction == 0.2);
    CHECK(r.auc_value >= 0.0);
    CHECK(r.auc_value <= 1.0);
  }
  CHECK(result.summary.size() == 2);
  for (const auto& s : result.summary) CHECK(s.n == 3);
}

TEST_CASE("link removal experiment scores the remaining zeros") {
  const auto net = sample_design(0.9, 0.15, 5.0, 40, 12, 8);
  ExperimentOptions eo;
  eo.q_ind = 2;
  eo.q_org = 2;
  eo.fit.n_random_restarts = 2;
  const auto result = prediction_experiment(net, {0.3}, MaskMode::links,
                                            {PredModel::mlvsbm}, 2, 12, eo);
  CHECK(result.runs.size() == 2);
  for (const auto& r : result.runs) {
    CHECK(r.auc_value >= 0.0);
    CHECK(r.auc_value <= 1.0);
  }
}

TEST_CASE("experiment repeats are reproducible and job-count independent") {
  const auto net = sample_design(0.9, 0.15, 5.0, 40, 12, 9);
  ExperimentOptions eo;
  eo.q_ind = 2;
  eo.q_org = 2;
  eo.q_sbm = 2;
  eo.fit.n_random_restarts = 2;
  const auto a = prediction_experiment(net, {0.2}, MaskMode::dyads,
                                       {PredModel::mlvsbm, PredModel::sbm}, 2, 13, eo);
  ExperimentOptions eo2 = eo;
  eo2.jobs = 4;
  const auto b = prediction_experiment(net, {0.2}, MaskMode::dyads,
                                       {PredModel::mlvsbm, PredModel::sbm}, 2, 13, eo2);
  REQUIRE(a.runs.size() == b.runs.size());
  std::multiset<double> av, bv;
  for (const auto& r : a.runs) av.insert(r.auc_value);
  for (const auto& r : b.runs) bv.insert(r.auc_value);
  CHECK(av == bv);
}
