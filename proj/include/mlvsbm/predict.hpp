#pragma once

#include <cstdint>
#include <string>
#include <tuple>
#include <vector>

#include "mlvsbm/network.hpp"
#include "mlvsbm/vem.hpp"

namespace mlvsbm {

enum class TargetSet { masked, zeros, all_offdiag };

TargetSet target_set_from_string(const std::string& s);
std::string to_string(TargetSet t);

struct PredictionScores {
  Level level = Level::ind;
  TargetSet target = TargetSet::all_offdiag;
  /// (i, j, score); unordered pairs with i<j on undirected levels.
  std::vector<std::tuple<int, int, double>> scores;
};

/// Edge probability per target dyad, mixing the fitted connectivities over
/// the responsibilities of the two endpoints.
PredictionScores dyad_probabilities(const MultilevelNetwork& net, const FitResult& fit,
                                    Level level, TargetSet target);

/// Unilevel variant, used for the single-level baseline.
PredictionScores dyad_probabilities_sbm(const MultilevelNetwork& net, const SbmFit& fit,
                                        Level level, TargetSet target);

enum class PredModel { mlvsbm, sbm };
std::string to_string(PredModel m);

struct ExperimentOptions {
  Level level = Level::ind;  // the level whose dyads are hidden and scored
  int q_ind = 1;
  int q_org = 1;
  int q_sbm = 1;
  bool use_select = false;   // refit with the model search instead of fixed sizes
  int q_max = 10;            // only with use_select
  FitOptions fit;
  int jobs = 1;
};

struct ExperimentRow {
  double fraction = 0.0;
  MaskMode mode = MaskMode::dyads;
  PredModel model = PredModel::mlvsbm;
  int repeat = 0;
  double auc_value = 0.0;
};

struct ExperimentSummaryRow {
  double fraction = 0.0;
  MaskMode mode = MaskMode::dyads;
  PredModel model = PredModel::mlvsbm;
  double mean_auc = 0.0;
  double stderr_auc = 0.0;
  int n = 0;
};

struct ExperimentResult {
  std::vector<ExperimentRow> runs;
  std::vector<ExperimentSummaryRow> summary;
};

/// Masking/refit/score protocol. For every fraction and repeat: hide part of
/// the target level, refit each requested model from scratch on the masked
/// network, score the held-out set (dyads mode: the masked dyads against
/// their true values; links mode: all remaining zero dyads with the removed
/// edges as positives) and record the AUC. Fractions that leave nothing to
/// score are rejected. Per-repeat seeds are split from `seed`.
ExperimentResult prediction_experiment(const MultilevelNetwork& net,
                                       const std::vector<double>& fractions,
                                       MaskMode mode,
                                       const std::vector<PredModel>& models,
                                       int repeats, std::uint64_t seed,
                                       const ExperimentOptions& options);

void write_experiment_csv(const ExperimentResult& result, const std::string& runs_path,
                          const std::string& summary_path);

}  // namespace mlvsbm
