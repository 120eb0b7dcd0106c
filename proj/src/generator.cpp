#include "mlvsbm/generator.hpp"

#include <cmath>

#include "mlvsbm/rng.hpp"

namespace mlvsbm {

namespace {

Assignments sample_assignments_impl(const ModelParams& p,
                                    const Eigen::MatrixXd& affiliation, Rng& rng) {
  const int n_ind = static_cast<int>(affiliation.rows());
  const int n_org = static_cast<int>(affiliation.cols());
  Assignments z;
  z.z_org.resize(static_cast<std::size_t>(n_org));
  for (int j = 0; j < n_org; ++j) {
    z.z_org[static_cast<std::size_t>(j)] = rng.categorical(p.pi_org);
  }
  z.z_ind.resize(static_cast<std::size_t>(n_ind));
  for (int i = 0; i < n_ind; ++i) {
    int org = 0;
    for (int j = 1; j < n_org; ++j) {
      if (affiliation(i, j) > affiliation(i, org)) org = j;
    }
    const int l = z.z_org[static_cast<std::size_t>(org)];
    z.z_ind[static_cast<std::size_t>(i)] = rng.categorical(p.gamma.col(l));
  }
  return z;
}

Eigen::MatrixXd sample_adjacency(const Eigen::MatrixXd& alpha,
                                 const std::vector<int>& z, bool directed, Rng& rng) {
  const int n = static_cast<int>(z.size());
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = directed ? 0 : i + 1; j < n; ++j) {
      if (i == j) continue;
      const double a = alpha(z[static_cast<std::size_t>(i)], z[static_cast<std::size_t>(j)]);
      const double v = rng.bernoulli(a) ? 1.0 : 0.0;
      x(i, j) = v;
      if (!directed) x(j, i) = v;
    }
  }
  return x;
}

}  // namespace

Eigen::MatrixXd sample_affiliation(int n_ind, int n_org, SizeLaw law,
                                   double exponent, std::uint64_t seed) {
  if (n_ind < 1 || n_org < 1) throw ValidationError("sample_affiliation: sizes must be >= 1");
  if (law == SizeLaw::power_law && !(exponent > 1.0)) {
    throw ValidationError("sample_affiliation: power-law exponent must be > 1");
  }
  Rng rng(seed);
  Eigen::VectorXd weights(n_org);
  if (law == SizeLaw::uniform) {
    weights.setOnes();
  } else {
    const auto perm = rng.permutation(n_org);
    for (int r = 0; r < n_org; ++r) {
      weights[perm[static_cast<std::size_t>(r)]] =
          std::pow(static_cast<double>(r + 1), -exponent);
    }
  }
  Eigen::MatrixXd aff = Eigen::MatrixXd::Zero(n_ind, n_org);
  for (int i = 0; i < n_ind; ++i) {
    aff(i, rng.categorical(weights)) = 1.0;
  }
  return aff;
}

Assignments sample_assignments(const ModelParams& params,
                               const Eigen::MatrixXd& affiliation,
                               std::uint64_t seed) {
  require_valid(params);
  Rng rng(seed);
  return sample_assignments_impl(params, affiliation, rng);
}

std::pair<MultilevelNetwork, Assignments> sample_network(
    const ModelParams& params, const Eigen::MatrixXd& affiliation,
    std::uint64_t seed) {
  require_valid(params);
  const int n_ind = static_cast<int>(affiliation.rows());
  const int n_org = static_cast<int>(affiliation.cols());
  if (n_ind < 1 || n_org < 1) throw ValidationError("sample_network: empty affiliation");

  Rng rng(seed);
  Assignments z = sample_assignments_impl(params, affiliation, rng);
  auto x_org = sample_adjacency(params.alpha_org, z.z_org, params.directed_org, rng);
  auto x_ind = sample_adjacency(params.alpha_ind, z.z_ind, params.directed_ind, rng);
  auto net = make_network(std::move(x_ind), std::move(x_org), affiliation,
                          params.directed_ind, params.directed_org);
  return {std::move(net), std::move(z)};
}

}  // namespace mlvsbm
