#include <doctest.h>

#include "mlvsbm/generator.hpp"
#include "mlvsbm/json_io.hpp"
#include "mlvsbm/model_select.hpp"

using namespace mlvsbm;

namespace {

MultilevelNetwork sample_net(std::uint64_t seed, bool masked) {
  ModelParams p;
  p.q_ind = 2;
  p.q_org = 2;
  p.pi_org = Eigen::Vector2d(0.4, 0.6);
  p.gamma = gamma_from_delta(0.8, 2);
  p.alpha_ind = topology_alpha(Topology::assortative, 0.15, 4.0, 2);
  p.alpha_org = topology_alpha(Topology::assortative, 0.15, 4.0, 2);
  p.directed_ind = true;  // exercise the directed path too
  const auto aff = sample_affiliation(15, 5, SizeLaw::uniform, 2.0, seed);
  auto [net, z] = sample_network(p, aff, seed + 1);
  if (masked) {
    net = apply_mask(net, Level::ind, 0.2, MaskMode::dyads, seed + 2).net;
    net = apply_mask(net, Level::org, 0.1, MaskMode::dyads, seed + 3).net;
  }
  return net;
}

}  // namespace

TEST_CASE("network bundle round trip preserves everything") {
  for (bool masked : {false, true}) {
    const auto net = sample_net(3, masked);
    const auto back = network_from_json(network_to_json(net));
    CHECK(back.x_ind == net.x_ind);
    CHECK(back.x_org == net.x_org);
    CHECK(back.mask_ind == net.mask_ind);
    CHECK(back.mask_org == net.mask_org);
    CHECK(back.affiliation == net.affiliation);
    CHECK(back.directed_ind == net.directed_ind);
  }
}

TEST_CASE("parameter round trip") {
  ModelParams p;
  p.q_ind = 3;
  p.q_org = 2;
  p.pi_org = Eigen::Vector2d(0.3, 0.7);
  p.gamma = Eigen::MatrixXd(3, 2);
  p.gamma << 0.2, 0.5, 0.3, 0.25, 0.5, 0.25;
  p.alpha_ind = topology_alpha(Topology::core_periphery, 0.1, 3.0, 3);
  p.alpha_org = topology_alpha(Topology::assortative, 0.1, 3.0, 2);
  const auto back = params_from_json(params_to_json(p));
  CHECK(back.pi_org == p.pi_org);
  CHECK(back.gamma == p.gamma);
  CHECK(back.alpha_ind == p.alpha_ind);
  CHECK(back.q_ind == 3);
}

TEST_CASE("invalid parameters are rejected at load") {
  ModelParams p;
  p.q_ind = 2;
  p.q_org = 2;
  p.pi_org = Eigen::Vector2d(0.3, 0.7);
  p.gamma = gamma_from_delta(0.8, 2);
  p.alpha_ind = topology_alpha(Topology::assortative, 0.1, 3.0, 2);
  p.alpha_org = topology_alpha(Topology::assortative, 0.1, 3.0, 2);
  auto j = params_to_json(p);
  j["pi_org"][0] = 0.9;  // no longer sums to 1
  CHECK_THROWS_AS(params_from_json(j), ValidationError);
}

TEST_CASE("fit round trip preserves the result") {
  const auto net = sample_net(9, true);
  FitOptions opts;
  opts.n_random_restarts = 2;
  auto f = fit(net, 2, 2, opts);
  f.icl = icl_mlvsbm(net, f);
  const auto back = fit_from_json(fit_to_json(f, opts));
  CHECK(back.bound == f.bound);
  CHECK(back.icl == f.icl);
  CHECK(back.map_assignments.z_ind == f.map_assignments.z_ind);
  CHECK(back.state.tau_ind == f.state.tau_ind);
  CHECK(back.bound_trace == f.bound_trace);
  CHECK(back.converged == f.converged);
}

TEST_CASE("selection serialization carries the search record") {
  const auto net = sample_net(11, false);
  SelectOptions so;
  so.q_max = 3;
  so.fit.n_random_restarts = 2;
  const auto sel = select(net, so);
  const auto j = selection_to_json(sel, so.fit);
  CHECK(j.at("best_q").size() == 2);
  CHECK(j.at("explored").size() == sel.explored.size());
  CHECK(j.at("search_trace").size() == sel.search_trace.size());
  CHECK(j.at("verdict").get<std::string>() == to_string(sel.verdict));
  CHECK(j.at("best_fit").contains("map_z_ind"));
}

TEST_CASE("assignments round trip") {
  Assignments z{{0, 1, 2, 1}, {1, 0}};
  const auto back = assignments_from_json(assignments_to_json(z));
  CHECK(back.z_ind == z.z_ind);
  CHECK(back.z_org == z.z_org);
}
