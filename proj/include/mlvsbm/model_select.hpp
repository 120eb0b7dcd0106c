#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mlvsbm/network.hpp"
#include "mlvsbm/vem.hpp"

namespace mlvsbm {

/// Model-complexity penalty of the two-level model. Per undirected level the
/// connectivity term is (1/2)(Q(Q+1)/2) log(n(n-1)/2); a directed level uses
/// (1/2) Q^2 log(n(n-1)). The mixing matrix contributes
/// (Q_org (Q_ind - 1)/2) log n_ind and the organization proportions
/// ((Q_org - 1)/2) log n_org.
double penalty_mlvsbm(int q_ind, int q_org, int n_ind, int n_org,
                      bool directed_ind, bool directed_org);

/// Unilevel penalty: connectivity term as above plus ((Q-1)/2) log n.
double penalty_sbm(int q, int n, bool directed);

/// Penalized complete log-likelihood at the MAP clustering of the fit.
double icl_mlvsbm(const MultilevelNetwork& net, const FitResult& fit);

double icl_sbm(const Eigen::MatrixXd& x, const Eigen::MatrixXd& mask, bool directed,
               const SbmFit& fit);

/// Splits one MAP block in two by Ward clustering of its members' observed
/// connection profiles (edge rates toward every current block, both
/// directions when the level is directed). Returns labels with Q+1 blocks,
/// or nothing when the block has fewer than two members.
std::optional<std::vector<int>> propose_split(const MultilevelNetwork& net,
                                              const FitResult& fit, Level level,
                                              int block);

/// Relabels block_b as block_a and compacts the label range to Q-1 values.
std::vector<int> propose_merge(const std::vector<int>& labels, int block_a, int block_b);

struct SelectOptions {
  int q_max = 10;
  FitOptions fit;          // tolerances, sweep budgets, seed, jobs
  bool exhaustive = false; // grid over all (q_ind, q_org); testing aid for tiny instances
};

enum class Verdict { dependent, independent };
std::string to_string(Verdict v);

struct SelectionResult {
  FitResult best_fit;
  std::pair<int, int> best_q;
  std::map<std::pair<int, int>, double> explored;  // best ICL per visited pair
  std::pair<int, int> independent_q;
  double icl_independent = 0.0;
  std::vector<double> icl_sbm_ind;  // unilevel ICL per q = 1..q_max
  std::vector<double> icl_sbm_org;
  Verdict verdict = Verdict::independent;
  struct TraceEntry {
    std::string move;
    int q_ind = 0, q_org = 0;
    double icl = 0.0;
  };
  std::vector<TraceEntry> search_trace;
  std::vector<std::string> warnings;
};

/// Stepwise block-count search. Fits unilevel models on each level over
/// q = 1..q_max, starts the joint search at the unilevel optima and moves to
/// the best split/merge neighbor while the ICL improves. Pairs with one
/// block on either level are scored by the exact product decomposition of
/// the two unilevel fits. The verdict compares the best joint ICL with the
/// sum of the unilevel optima.
SelectionResult select(const MultilevelNetwork& net, const SelectOptions& options = {});

}  // namespace mlvsbm
