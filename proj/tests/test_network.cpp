#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "mlvsbm/generator.hpp"
#include "mlvsbm/network.hpp"

using namespace mlvsbm;
namespace fs = std::filesystem;

namespace {

MultilevelNetwork tiny_net() {
  Eigen::MatrixXd xi = Eigen::MatrixXd::Zero(3, 3);
  xi(0, 1) = xi(1, 0) = 1.0;
  Eigen::MatrixXd xo = Eigen::MatrixXd::Zero(2, 2);
  Eigen::MatrixXd aff(3, 2);
  aff << 1, 0, 0, 1, 1, 0;
  return make_network(xi, xo, aff, false, false);
}

fs::path tmp_dir() {
  auto dir = fs::temp_directory_path() / "mlvsbm_test_net";
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("well-formed network validates cleanly") {
  CHECK(validate(tiny_net()).empty());
}

TEST_CASE("affiliation row summing to 2 is reported") {
  auto net = tiny_net();
  net.affiliation(2, 1) = 1.0;  // row 2 now (1,1)
  const auto v = validate(net);
  REQUIRE(v.size() == 1);
  CHECK(v[0].matrix == "affiliation");
  CHECK(v[0].where == "row 2");
  CHECK(v[0].rule.find("sums to 2") != std::string::npos);
}

TEST_CASE("nonzero diagonal is reported") {
  auto net = tiny_net();
  net.x_ind(0, 0) = 1.0;
  const auto v = validate(net);
  REQUIRE(v.size() == 1);
  CHECK(v[0].matrix == "x_ind");
  CHECK(v[0].rule == "nonzero diagonal");
}

TEST_CASE("masked x entries may hold any value") {
  auto net = tiny_net();
  net.mask_ind(0, 2) = net.mask_ind(2, 0) = 0.0;
  net.x_ind(0, 2) = 7.25;
  net.x_ind(2, 0) = -3.0;
  CHECK(validate(net).empty());
}

TEST_CASE("asymmetry on an undirected level is reported") {
  auto net = tiny_net();
  net.x_ind(0, 2) = 1.0;  // (2,0) left at 0
  CHECK(!validate(net).empty());
}

TEST_CASE("densities and organization sizes") {
  const auto net = tiny_net();
  const auto s = network_stats(net);
  CHECK(s.density_ind == doctest::Approx(2.0 / 6.0));
  CHECK(s.density_org == 0.0);
  CHECK(s.org_sizes.sum() == 3);
  CHECK(s.org_sizes[0] == 2);

  // complete graph has density 1
  Eigen::MatrixXd full = Eigen::MatrixXd::Ones(4, 4);
  full.diagonal().setZero();
  Eigen::MatrixXd aff = Eigen::MatrixXd::Zero(4, 2);
  aff.col(0).setOnes();
  const auto net2 = make_network(full, Eigen::MatrixXd::Zero(2, 2), aff, false, false);
  CHECK(network_stats(net2).density_ind == 1.0);
}

TEST_CASE("mask fraction 0 is a no-op") {
  const auto net = tiny_net();
  const auto r = apply_mask(net, Level::ind, 0.0, MaskMode::dyads, 1);
  CHECK(r.held_out.empty());
  CHECK(r.net.mask_ind == net.mask_ind);
  CHECK(r.net.x_ind == net.x_ind);
}

TEST_CASE("dyad masking hits the floored count and keeps symmetry") {
  Eigen::MatrixXd xi = Eigen::MatrixXd::Zero(4, 4);
  xi(0, 1) = xi(1, 0) = 1.0;
  xi(2, 3) = xi(3, 2) = 1.0;
  Eigen::MatrixXd aff = Eigen::MatrixXd::Zero(4, 1);
  aff.col(0).setOnes();
  const auto net = make_network(xi, Eigen::MatrixXd::Zero(1, 1), aff, false, false);

  // 6 dyads, fraction 0.25 -> floor(1.5) = 1 masked dyad
  const auto r = apply_mask(net, Level::ind, 0.25, MaskMode::dyads, 99);
  CHECK(r.held_out.size() == 1);
  double masked = 0.0;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      if (i != j) masked += 1.0 - r.net.mask_ind(i, j);
      CHECK(r.net.mask_ind(i, j) == r.net.mask_ind(j, i));
    }
  }
  CHECK(masked == 2.0);  // one dyad, both orientations
  CHECK(r.net.mask_ind.diagonal().sum() == 0.0);
  CHECK(validate(r.net).empty());
}

TEST_CASE("link removal with fraction 1 empties the graph") {
  Eigen::MatrixXd xi = Eigen::MatrixXd::Zero(5, 5);
  int e = 0;
  for (int i = 0; i < 5 && e < 5; ++i) {
    for (int j = i + 1; j < 5 && e < 5; ++j) {
      xi(i, j) = xi(j, i) = 1.0;
      ++e;
    }
  }
  Eigen::MatrixXd aff = Eigen::MatrixXd::Zero(5, 1);
  aff.col(0).setOnes();
  const auto net = make_network(xi, Eigen::MatrixXd::Zero(1, 1), aff, false, false);
  const auto r = apply_mask(net, Level::ind, 1.0, MaskMode::links, 5);
  CHECK(r.held_out.size() == 5);
  CHECK(r.net.x_ind.sum() == 0.0);
  CHECK(r.net.mask_ind == net.mask_ind);  // links mode leaves the mask alone
}

TEST_CASE("mask fraction range errors") {
  const auto net = tiny_net();
  CHECK_THROWS_AS(apply_mask(net, Level::ind, 1.0, MaskMode::dyads, 1), ValidationError);
  CHECK_THROWS_AS(apply_mask(net, Level::ind, -0.1, MaskMode::links, 1), ValidationError);
  CHECK_THROWS_AS(apply_mask(net, Level::org, 0.5, MaskMode::links, 1), ValidationError);
}

TEST_CASE("edge list loading symmetrizes and transcribes") {
  const auto dir = tmp_dir();
  {
    std::ofstream(dir / "ind.csv") << "from,to\n0,1\n";
    std::ofstream(dir / "org.csv") << "from,to\n";
    std::ofstream(dir / "aff.csv") << "individual,organization\n0,1\n1,0\n";
  }
  LoadOptions opt;
  const auto net = load_network((dir / "ind.csv").string(), (dir / "org.csv").string(),
                                (dir / "aff.csv").string(), opt);
  CHECK(net.n_ind() == 2);
  CHECK(net.n_org() == 2);
  CHECK(net.x_ind(0, 1) == 1.0);
  CHECK(net.x_ind(1, 0) == 1.0);
  CHECK(net.x_org.sum() == 0.0);
  CHECK(net.affiliation(0, 1) == 1.0);
  CHECK(net.affiliation(1, 0) == 1.0);
}

TEST_CASE("loader reports malformed lines with their number") {
  const auto dir = tmp_dir();
  std::ofstream(dir / "bad.csv") << "from,to\n0,1\nnot-a-pair\n";
  std::ofstream(dir / "org2.csv") << "from,to\n";
  std::ofstream(dir / "aff2.csv") << "individual,organization\n0,0\n1,0\n";
  try {
    load_network((dir / "bad.csv").string(), (dir / "org2.csv").string(),
                 (dir / "aff2.csv").string(), {});
    FAIL("expected a parse error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find(":3:") != std::string::npos);
  }
}

TEST_CASE("loader rejects out-of-range node ids") {
  const auto dir = tmp_dir();
  std::ofstream(dir / "ind3.csv") << "from,to\n0,5\n";
  std::ofstream(dir / "org3.csv") << "from,to\n";
  std::ofstream(dir / "aff3.csv") << "individual,organization\n0,0\n1,0\n";
  CHECK_THROWS_AS(load_network((dir / "ind3.csv").string(), (dir / "org3.csv").string(),
                               (dir / "aff3.csv").string(), {}),
                  ValidationError);
}

TEST_CASE("csv round trip is the identity on fully observed networks") {
  ModelParams p;
  p.q_ind = 2;
  p.q_org = 2;
  p.pi_org = Eigen::Vector2d(0.5, 0.5);
  p.gamma = gamma_from_delta(0.8, 2);
  p.alpha_ind = topology_alpha(Topology::assortative, 0.2, 3.0, 2);
  p.alpha_org = topology_alpha(Topology::assortative, 0.2, 3.0, 2);
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    const auto aff = sample_affiliation(12, 4, SizeLaw::uniform, 2.0, seed);
    const auto [net, z] = sample_network(p, aff, seed);
    const auto dir = tmp_dir();
    save_network(net, (dir / "i.csv").string(), (dir / "o.csv").string(),
                 (dir / "a.csv").string());
    LoadOptions opt;
    opt.n_ind = net.n_ind();
    opt.n_org = net.n_org();
    const auto back = load_network((dir / "i.csv").string(), (dir / "o.csv").string(),
                                   (dir / "a.csv").string(), opt);
    CHECK(back.x_ind == net.x_ind);
    CHECK(back.x_org == net.x_org);
    CHECK(back.affiliation == net.affiliation);
  }
}
