#pragma once

#include <cstdint>
#include <utility>

#include "mlvsbm/network.hpp"
#include "mlvsbm/params.hpp"

namespace mlvsbm {

enum class SizeLaw { power_law, uniform };

/// One-hot affiliation matrix with organization sizes following the chosen
/// law. power_law: weight j^-exponent is assigned over a random permutation
/// of the organizations, then individuals are assigned i.i.d. with
/// probability proportional to the weights. Emits no empty-organization
/// guarantee; sizes are random.
Eigen::MatrixXd sample_affiliation(int n_ind, int n_org, SizeLaw law,
                                   double exponent, std::uint64_t seed);

/// Block memberships only: organization blocks i.i.d. from pi_org in index
/// order, then each individual from the gamma column of its organization's
/// block.
Assignments sample_assignments(const ModelParams& params,
                               const Eigen::MatrixXd& affiliation,
                               std::uint64_t seed);

/// Full draw from the generative model. Sampling order is fixed for
/// reproducibility: organization blocks, individual blocks, organization
/// dyads row-major, individual dyads row-major (upper triangle only when the
/// level is undirected). Masks are all-observed.
std::pair<MultilevelNetwork, Assignments> sample_network(
    const ModelParams& params, const Eigen::MatrixXd& affiliation,
    std::uint64_t seed);

}  // namespace mlvsbm
