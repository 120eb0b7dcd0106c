#include <doctest.h>

#include <cmath>

#include "mlvsbm/generator.hpp"
#include "mlvsbm/network.hpp"
#include "mlvsbm/params.hpp"
#include "mlvsbm/rng.hpp"

using namespace mlvsbm;

namespace {

ModelParams design_params(double delta, Topology ind_kind, double d, double eps,
                          int q = 3) {
  ModelParams p;
  p.q_ind = q;
  p.q_org = q;
  p.pi_org = Eigen::VectorXd::Constant(q, 1.0 / q);
  p.gamma = gamma_from_delta(delta, q);
  p.alpha_ind = topology_alpha(ind_kind, d, eps, q);
  p.alpha_org = topology_alpha(Topology::assortative, 0.1, 5.0, q);
  return p;
}

}  // namespace

TEST_CASE("assortative pattern matches the reference matrix") {
  const auto a = topology_alpha(Topology::assortative, 0.1, 5.0, 3);
  Eigen::MatrixXd ref(3, 3);
  ref << 0.5, 0.1, 0.1, 0.1, 0.5, 0.1, 0.1, 0.1, 0.5;
  CHECK(a.isApprox(ref, 1e-15));
}

TEST_CASE("eps 1 collapses every topology to a flat matrix") {
  for (auto kind : {Topology::assortative, Topology::disassortative, Topology::core_periphery}) {
    const auto a = topology_alpha(kind, 0.1, 1.0, 3);
    CHECK(a.isApprox(Eigen::MatrixXd::Constant(3, 3, 0.1), 1e-15));
  }
}

TEST_CASE("core-periphery pattern") {
  const auto a = topology_alpha(Topology::core_periphery, 0.1, 2.0, 3);
  Eigen::MatrixXd ref(3, 3);
  ref << 0.2, 0.2, 0.1, 0.2, 0.1, 0.1, 0.1, 0.1, 0.1;
  CHECK(a.isApprox(ref, 1e-15));
}

TEST_CASE("disassortative pattern") {
  const auto a = topology_alpha(Topology::disassortative, 0.05, 4.0, 2);
  Eigen::MatrixXd ref(2, 2);
  ref << 0.05, 0.2, 0.2, 0.05;
  CHECK(a.isApprox(ref, 1e-15));
}

TEST_CASE("topology rejects probabilities above one") {
  CHECK_THROWS_AS(topology_alpha(Topology::assortative, 0.3, 5.0, 3), ValidationError);
  CHECK_THROWS_AS(topology_alpha(Topology::assortative, 0.1, 0.5, 3), ValidationError);
}

TEST_CASE("mixing matrix from the dependence strength") {
  CHECK(gamma_from_delta(1.0 / 3.0, 3).isApprox(Eigen::MatrixXd::Constant(3, 3, 1.0 / 3.0), 1e-15));
  CHECK(gamma_from_delta(1.0, 3).isApprox(Eigen::MatrixXd::Identity(3, 3), 1e-15));
  const auto g = gamma_from_delta(0.8, 3);
  CHECK(g(0, 0) == doctest::Approx(0.8));
  CHECK(g(1, 0) == doctest::Approx(0.1));
  for (int l = 0; l < 3; ++l) CHECK(g.col(l).sum() == doctest::Approx(1.0));
  CHECK_THROWS_AS(gamma_from_delta(1.5, 3), ValidationError);
  CHECK_THROWS_AS(gamma_from_delta(0.5, 1), ValidationError);
}

TEST_CASE("parameter validation catches broken inputs") {
  auto p = design_params(0.8, Topology::assortative, 0.1, 5.0);
  CHECK(check_params(p).empty());
  p.pi_org[0] = 0.9;
  CHECK(!check_params(p).empty());
}

TEST_CASE("coefficient separation diagnostic") {
  // unequal proportions separate the coefficients
  auto p = design_params(0.8, Topology::assortative, 0.1, 5.0);
  p.pi_org << 0.5, 0.3, 0.2;
  const auto r = identifiability_diagnostic(p);
  CHECK(r.ok);
  CHECK(r.min_gap_ind > 0.0);
  CHECK(r.min_gap_org > 0.0);

  // the fully symmetric design collapses them (uniform proportions,
  // exchangeable blocks)
  const auto sym = design_params(0.8, Topology::assortative, 0.1, 5.0);
  const auto r2 = identifiability_diagnostic(sym);
  CHECK(!r2.ok);
  CHECK(r2.min_gap_ind == 0.0);
}

TEST_CASE("uniform affiliation keeps the row invariant") {
  const auto aff = sample_affiliation(6, 3, SizeLaw::uniform, 2.0, 4);
  CHECK(aff.rows() == 6);
  for (int i = 0; i < 6; ++i) CHECK(aff.row(i).sum() == 1.0);
  CHECK(aff.sum() == 6.0);
}

TEST_CASE("power-law sizes are skewed") {
  const auto aff = sample_affiliation(1000, 10, SizeLaw::power_law, 2.0, 11);
  const Eigen::VectorXd sizes = aff.colwise().sum();
  CHECK(sizes.maxCoeff() > sizes.minCoeff());
  CHECK(sizes.sum() == 1000.0);
}

TEST_CASE("single organization takes everyone") {
  const auto aff = sample_affiliation(5, 1, SizeLaw::power_law, 2.0, 1);
  CHECK(aff.col(0).sum() == 5.0);
}

TEST_CASE("affiliation rejects bad exponents") {
  CHECK_THROWS_AS(sample_affiliation(10, 2, SizeLaw::power_law, 1.0, 1), ValidationError);
}

TEST_CASE("degenerate connectivities give complete and empty graphs") {
  ModelParams p;
  p.q_ind = 1;
  p.q_org = 1;
  p.pi_org = Eigen::VectorXd::Ones(1);
  p.gamma = Eigen::MatrixXd::Ones(1, 1);
  p.alpha_ind = Eigen::MatrixXd::Ones(1, 1);
  p.alpha_org = Eigen::MatrixXd::Zero(1, 1);
  const auto aff = sample_affiliation(6, 3, SizeLaw::uniform, 2.0, 2);
  const auto [net, z] = sample_network(p, aff, 3);
  CHECK(net.x_ind.sum() == 6.0 * 5.0);
  CHECK(net.x_org.sum() == 0.0);
  CHECK(validate(net).empty());
}

TEST_CASE("deterministic mixing ties the levels") {
  const auto p = design_params(1.0, Topology::assortative, 0.1, 5.0);
  const auto aff = sample_affiliation(40, 12, SizeLaw::uniform, 2.0, 5);
  const auto [net, z] = sample_network(p, aff, 7);
  const auto orgs = net.org_of();
  for (int i = 0; i < 40; ++i) {
    CHECK(z.z_ind[(std::size_t)i] == z.z_org[(std::size_t)orgs[(std::size_t)i]]);
  }
}

TEST_CASE("sampler is bit-reproducible") {
  const auto p = design_params(0.8, Topology::assortative, 0.1, 5.0);
  const auto aff = sample_affiliation(30, 10, SizeLaw::power_law, 2.0, 6);
  const auto [n1, z1] = sample_network(p, aff, 123);
  const auto [n2, z2] = sample_network(p, aff, 123);
  CHECK(n1.x_ind == n2.x_ind);
  CHECK(n1.x_org == n2.x_org);
  CHECK(z1.z_ind == z2.z_ind);
  const auto [n3, z3] = sample_network(p, aff, 124);
  CHECK(n1.x_ind != n3.x_ind);
}

TEST_CASE("organization density matches its expectation over seeds") {
  const auto p = design_params(0.8, Topology::assortative, 0.1, 5.0);
  double expected = 0.0;
  for (int l = 0; l < 3; ++l) {
    for (int m = 0; m < 3; ++m) {
      expected += p.pi_org[l] * p.pi_org[m] * p.alpha_org(l, m);
    }
  }
  const auto aff = sample_affiliation(10, 60, SizeLaw::uniform, 2.0, 8);
  double mean_density = 0.0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto [net, z] = sample_network(p, aff, 1000 + seed);
    mean_density += network_stats(net).density_org;
  }
  mean_density /= 50.0;
  CHECK(std::abs(mean_density - expected) < 0.03);
}

TEST_CASE("organization block proportions obey the law of large numbers") {
  const auto p = design_params(0.8, Topology::assortative, 0.1, 5.0);
  const int n_org = 10000;
  Eigen::MatrixXd aff = Eigen::MatrixXd::Zero(2, n_org);
  aff(0, 0) = aff(1, 1) = 1.0;
  const auto z = sample_assignments(p, aff, 77);
  Eigen::Vector3d freq = Eigen::Vector3d::Zero();
  for (int l : z.z_org) freq[l] += 1.0;
  freq /= static_cast<double>(n_org);
  for (int l = 0; l < 3; ++l) {
    CHECK(std::abs(freq[l] - p.pi_org[l]) < 0.02);
  }
}

TEST_CASE("uniform mixing leaves the levels independent") {
  // chi-squared dependence statistic of (individual block, organization block)
  // pairs stays under the 0.999 quantile of its null, chi2(df=4) = 18.4668
  const auto p = design_params(1.0 / 3.0, Topology::assortative, 0.1, 5.0);
  const int n_ind = 10000, n_org = 50;
  const auto aff = sample_affiliation(n_ind, n_org, SizeLaw::uniform, 2.0, 9);
  const auto z = sample_assignments(p, aff, 31);

  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(3, 3);
  const Eigen::MatrixXd affT = aff;
  for (int i = 0; i < n_ind; ++i) {
    int org = 0;
    for (int j = 0; j < n_org; ++j) {
      if (affT(i, j) == 1.0) org = j;
    }
    counts(z.z_ind[(std::size_t)i], z.z_org[(std::size_t)org]) += 1.0;
  }
  const double total = counts.sum();
  double stat = 0.0;
  for (int k = 0; k < 3; ++k) {
    for (int l = 0; l < 3; ++l) {
      const double e = counts.row(k).sum() * counts.col(l).sum() / total;
      stat += (counts(k, l) - e) * (counts(k, l) - e) / e;
    }
  }
  CHECK(stat < 18.4668);
}
