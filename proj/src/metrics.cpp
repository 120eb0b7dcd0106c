#include "mlvsbm/metrics.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "mlvsbm/network.hpp"

namespace mlvsbm {

double ari(const std::vector<int>& z1, const std::vector<int>& z2) {
  if (z1.size() != z2.size()) throw ValidationError("ari: length mismatch");
  const auto n = z1.size();
  if (n < 2) throw ValidationError("ari: need at least 2 elements");

  std::map<std::pair<int, int>, double> cells;
  std::map<int, double> rows, cols;
  for (std::size_t i = 0; i < n; ++i) {
    cells[{z1[i], z2[i]}] += 1.0;
    rows[z1[i]] += 1.0;
    cols[z2[i]] += 1.0;
  }
  auto comb2 = [](double m) { return m * (m - 1.0) / 2.0; };
  double index = 0.0, row_comb = 0.0, col_comb = 0.0;
  for (const auto& [k, v] : cells) index += comb2(v);
  for (const auto& [k, v] : rows) row_comb += comb2(v);
  for (const auto& [k, v] : cols) col_comb += comb2(v);
  const double total = comb2(static_cast<double>(n));
  const double expected = row_comb * col_comb / total;
  const double max_index = 0.5 * (row_comb + col_comb);
  const double denom = max_index - expected;
  if (denom == 0.0) return 1.0;  // both trivial partitions, identical
  return (index - expected) / denom;
}

double auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size()) throw ValidationError("auc: length mismatch");
  const auto n = scores.size();
  std::size_t n_pos = 0;
  for (int l : labels) {
    if (l != 0 && l != 1) throw ValidationError("auc: labels must be 0/1");
    n_pos += static_cast<std::size_t>(l);
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw ValidationError("auc: need at least one positive and one negative");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&scores](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // midranks over tie groups, summed for the positives
  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double midrank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
    for (std::size_t t = i; t <= j; ++t) {
      if (labels[order[t]] == 1) rank_sum_pos += midrank;
    }
    i = j + 1;
  }
  const double np = static_cast<double>(n_pos), nn = static_cast<double>(n_neg);
  return (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn);
}

}  // namespace mlvsbm
