#include "mlvsbm/predict.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include "mlvsbm/metrics.hpp"
#include "mlvsbm/model_select.hpp"
#include "mlvsbm/parallel.hpp"
#include "mlvsbm/rng.hpp"

namespace mlvsbm {

namespace {

PredictionScores score_targets(const MultilevelNetwork& net, const Eigen::MatrixXd& tau,
                               const Eigen::MatrixXd& alpha, Level level, TargetSet target) {
  const Eigen::MatrixXd& x = net.x(level);
  const Eigen::MatrixXd& mask = net.mask(level);
  const bool directed = net.directed(level);
  const int n = static_cast<int>(x.rows());
  const Eigen::MatrixXd p = tau * alpha * tau.transpose();

  PredictionScores out;
  out.level = level;
  out.target = target;
  for (int i = 0; i < n; ++i) {
    for (int j = directed ? 0 : i + 1; j < n; ++j) {
      if (i == j) continue;
      bool keep = false;
      switch (target) {
        case TargetSet::masked: keep = mask(i, j) == 0.0; break;
        case TargetSet::zeros: keep = mask(i, j) == 1.0 && x(i, j) == 0.0; break;
        case TargetSet::all_offdiag: keep = true; break;
      }
      if (keep) out.scores.emplace_back(i, j, p(i, j));
    }
  }
  if (out.scores.empty()) throw ValidationError("dyad_probabilities: empty target set");
  return out;
}

double score_auc(const PredictionScores& scores, const Eigen::MatrixXd& truth_x,
                 const DyadList& positives) {
  std::map<std::pair<int, int>, bool> pos;
  for (const auto& d : positives) pos[d] = true;
  std::vector<double> s;
  std::vector<int> labels;
  s.reserve(scores.scores.size());
  labels.reserve(scores.scores.size());
  for (const auto& [i, j, v] : scores.scores) {
    s.push_back(v);
    if (positives.empty()) {
      labels.push_back(truth_x(i, j) == 1.0 ? 1 : 0);
    } else {
      labels.push_back(pos.count({i, j}) != 0 ? 1 : 0);
    }
  }
  return auc(s, labels);
}

}  // namespace

TargetSet target_set_from_string(const std::string& s) {
  if (s == "masked") return TargetSet::masked;
  if (s == "zeros") return TargetSet::zeros;
  if (s == "all") return TargetSet::all_offdiag;
  throw ValidationError("unknown target set '" + s + "'");
}

std::string to_string(TargetSet t) {
  switch (t) {
    case TargetSet::masked: return "masked";
    case TargetSet::zeros: return "zeros";
    case TargetSet::all_offdiag: return "all";
  }
  return "?";
}

std::string to_string(PredModel m) {
  return m == PredModel::mlvsbm ? "mlvsbm" : "sbm";
}

PredictionScores dyad_probabilities(const MultilevelNetwork& net, const FitResult& fit,
                                    Level level, TargetSet target) {
  const Eigen::MatrixXd& tau = level == Level::ind ? fit.state.tau_ind : fit.state.tau_org;
  const Eigen::MatrixXd& alpha =
      level == Level::ind ? fit.params.alpha_ind : fit.params.alpha_org;
  if (tau.rows() != (level == Level::ind ? net.n_ind() : net.n_org())) {
    throw ValidationError("dyad_probabilities: fit does not match the network");
  }
  return score_targets(net, tau, alpha, level, target);
}

PredictionScores dyad_probabilities_sbm(const MultilevelNetwork& net, const SbmFit& fit,
                                        Level level, TargetSet target) {
  return score_targets(net, fit.tau, fit.alpha, level, target);
}

ExperimentResult prediction_experiment(const MultilevelNetwork& net,
                                       const std::vector<double>& fractions,
                                       MaskMode mode,
                                       const std::vector<PredModel>& models,
                                       int repeats, std::uint64_t seed,
                                       const ExperimentOptions& options) {
  require_valid(net);
  if (repeats < 1) throw ValidationError("prediction_experiment: repeats must be >= 1");
  if (models.empty()) throw ValidationError("prediction_experiment: no models requested");
  // fraction 0 hides nothing, so it contributes no row
  std::vector<double> grid;
  for (double f : fractions) {
    if (f < 0.0) throw ValidationError("prediction_experiment: negative fraction");
    if (f > 0.0) grid.push_back(f);
  }

  struct Task {
    std::size_t f_idx = 0;
    int repeat = 0;
  };
  std::vector<Task> tasks;
  for (std::size_t fi = 0; fi < grid.size(); ++fi) {
    for (int r = 0; r < repeats; ++r) tasks.push_back({fi, r});
  }

  const Level level = options.level;
  const Rng root(seed);
  std::vector<std::vector<ExperimentRow>> rows(tasks.size());
  parallel_for(static_cast<int>(tasks.size()), options.jobs, [&](int t) {
    const Task& task = tasks[static_cast<std::size_t>(t)];
    const double fraction = grid[task.f_idx];
    const std::uint64_t task_seed =
        root.split(task.f_idx * 10007ULL + static_cast<std::uint64_t>(task.repeat)).seed();
    const MaskResult masked = apply_mask(net, level, fraction, mode, task_seed);
    const TargetSet target = mode == MaskMode::dyads ? TargetSet::masked : TargetSet::zeros;
    const DyadList positives = mode == MaskMode::links ? masked.held_out : DyadList{};

    FitOptions fo = options.fit;
    fo.seed = Rng(task_seed).split(7).seed();
    fo.jobs = 1;  // parallelism lives at the repeat level

    for (PredModel model : models) {
      PredictionScores scores;
      if (model == PredModel::mlvsbm) {
        FitResult f;
        if (options.use_select) {
          SelectOptions so;
          so.q_max = options.q_max;
          so.fit = fo;
          f = select(masked.net, so).best_fit;
        } else {
          f = fit(masked.net, options.q_ind, options.q_org, fo);
        }
        scores = dyad_probabilities(masked.net, f, level, target);
      } else {
        int q = options.q_sbm;
        if (options.use_select) {
          // unilevel scan is part of select; reuse it through the search
          SelectOptions so;
          so.q_max = options.q_max;
          so.fit = fo;
          const SelectionResult sel = select(masked.net, so);
          q = level == Level::ind ? sel.independent_q.first : sel.independent_q.second;
        }
        const SbmFit f = fit_sbm(masked.net.x(level), masked.net.mask(level),
                                 masked.net.directed(level), q, fo);
        scores = dyad_probabilities_sbm(masked.net, f, level, target);
      }
      ExperimentRow row;
      row.fraction = fraction;
      row.mode = mode;
      row.model = model;
      row.repeat = task.repeat;
      row.auc_value = score_auc(scores, net.x(level), positives);
      rows[static_cast<std::size_t>(t)].push_back(row);
    }
  });

  ExperimentResult result;
  for (const auto& r : rows) {
    result.runs.insert(result.runs.end(), r.begin(), r.end());
  }

  // mean and standard error per (fraction, model)
  std::map<std::pair<double, std::string>, std::vector<double>> groups;
  for (const auto& row : result.runs) {
    groups[{row.fraction, to_string(row.model)}].push_back(row.auc_value);
  }
  for (const auto& [key, vals] : groups) {
    ExperimentSummaryRow s;
    s.fraction = key.first;
    s.mode = mode;
    s.model = key.second == "mlvsbm" ? PredModel::mlvsbm : PredModel::sbm;
    s.n = static_cast<int>(vals.size());
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= static_cast<double>(vals.size());
    double var = 0.0;
    for (double v : vals) var += (v - mean) * (v - mean);
    var = vals.size() > 1 ? var / (static_cast<double>(vals.size()) - 1.0) : 0.0;
    s.mean_auc = mean;
    s.stderr_auc = std::sqrt(var / static_cast<double>(vals.size()));
    result.summary.push_back(s);
  }
  return result;
}

void write_experiment_csv(const ExperimentResult& result, const std::string& runs_path,
                          const std::string& summary_path) {
  char buf[128];
  {
    std::ofstream out(runs_path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + runs_path);
    out << "fraction,mode,model,repeat,auc\n";
    for (const auto& r : result.runs) {
      std::snprintf(buf, sizeof buf, "%.10g,%s,%s,%d,%.10g\n", r.fraction,
                    r.mode == MaskMode::dyads ? "dyads" : "links",
                    to_string(r.model).c_str(), r.repeat, r.auc_value);
      out << buf;
    }
  }
  {
    std::ofstream out(summary_path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + summary_path);
    out << "fraction,mode,model,mean_auc,stderr\n";
    for (const auto& s : result.summary) {
      std::snprintf(buf, sizeof buf, "%.10g,%s,%s,%.10g,%.10g\n", s.fraction,
                    s.mode == MaskMode::dyads ? "dyads" : "links",
                    to_string(s.model).c_str(), s.mean_auc, s.stderr_auc);
      out << buf;
    }
  }
}

}  // namespace mlvsbm
