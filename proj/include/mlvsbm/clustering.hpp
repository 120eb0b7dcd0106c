#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mlvsbm/rng.hpp"

namespace mlvsbm {

/// Lloyd k-means with k-means++ seeding, best of n_restarts by within-cluster
/// sum of squares. Deterministic given the generator state; ties go to the
/// lowest index.
std::vector<int> kmeans(const Eigen::MatrixXd& points, int k, Rng& rng,
                        int n_restarts = 20, int max_iter = 100);

/// Agglomerative Ward clustering (Lance-Williams recurrence) on row vectors,
/// cut at k clusters. Labels are compacted in order of first appearance.
std::vector<int> ward_cut(const Eigen::MatrixXd& points, int k);

enum class InitMethod { spectral, hierarchical, random, given };

InitMethod init_method_from_string(const std::string& s);
std::string to_string(InitMethod m);

/// Hard initial clustering of the rows of a square adjacency (spectral,
/// hierarchical) or of arbitrary profile rows (hierarchical). spectral:
/// k-means on the leading k eigenvectors of the symmetrized,
/// degree-regularized adjacency. hierarchical: Ward on connection profiles
/// (rows and columns concatenated for a square input). random: i.i.d.
/// uniform labels.
std::vector<int> init_clustering(const Eigen::MatrixXd& matrix, int k,
                                 InitMethod method, std::uint64_t seed);

}  // namespace mlvsbm
