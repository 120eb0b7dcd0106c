#pragma once

#include <vector>

namespace mlvsbm {

/// Adjusted Rand index (Hubert-Arabie) between two hard clusterings.
/// Degenerate case: when the adjustment denominator is zero (both inputs a
/// single cluster, or both all singletons) the partitions coincide and the
/// value is defined as 1.
double ari(const std::vector<int>& z1, const std::vector<int>& z2);

/// Area under the ROC curve via the rank-sum (Mann-Whitney) statistic with
/// midranks for ties. Requires at least one positive and one negative label.
double auc(const std::vector<double>& scores, const std::vector<int>& labels);

}  // namespace mlvsbm
