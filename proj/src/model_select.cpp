#include "mlvsbm/model_select.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "mlvsbm/parallel.hpp"

namespace mlvsbm {

namespace {

double alpha_penalty(int q, int n, bool directed) {
  const double qd = q, nd = n;
  if (directed) {
    return 0.5 * qd * qd * std::log(nd * (nd - 1.0));
  }
  return 0.5 * (qd * (qd + 1.0) / 2.0) * std::log(nd * (nd - 1.0) / 2.0);
}

// Observed adjacency and dyad indicators, masked entries never read.
void observed_matrices(const Eigen::MatrixXd& x, const Eigen::MatrixXd& mask,
                       Eigen::MatrixXd& mx, Eigen::MatrixXd& m0) {
  const int n = static_cast<int>(x.rows());
  mx = Eigen::MatrixXd::Zero(n, n);
  m0 = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j || mask(i, j) != 1.0) continue;
      m0(i, j) = 1.0;
      mx(i, j) = x(i, j) == 1.0 ? 1.0 : 0.0;
    }
  }
}

// Edge rates from each member toward every current block (both directions
// when directed), the geometry the split proposals cluster on.
Eigen::MatrixXd block_profiles(const Eigen::MatrixXd& mx, const Eigen::MatrixXd& m0,
                               bool directed, const std::vector<int>& labels, int q,
                               const std::vector<int>& members) {
  const int n = static_cast<int>(labels.size());
  const int m = static_cast<int>(members.size());
  Eigen::MatrixXd prof = Eigen::MatrixXd::Zero(m, directed ? 2 * q : q);
  for (int a = 0; a < m; ++a) {
    const int i = members[static_cast<std::size_t>(a)];
    Eigen::VectorXd num_out = Eigen::VectorXd::Zero(q), den_out = Eigen::VectorXd::Zero(q);
    Eigen::VectorXd num_in = Eigen::VectorXd::Zero(q), den_in = Eigen::VectorXd::Zero(q);
    for (int j = 0; j < n; ++j) {
      const int c = labels[static_cast<std::size_t>(j)];
      num_out[c] += mx(i, j);
      den_out[c] += m0(i, j);
      if (directed) {
        num_in[c] += mx(j, i);
        den_in[c] += m0(j, i);
      }
    }
    for (int c = 0; c < q; ++c) {
      prof(a, c) = den_out[c] > 0.0 ? num_out[c] / den_out[c] : 0.0;
      if (directed) prof(a, q + c) = den_in[c] > 0.0 ? num_in[c] / den_in[c] : 0.0;
    }
  }
  return prof;
}

std::optional<std::vector<int>> split_block_labels(const Eigen::MatrixXd& mx,
                                                   const Eigen::MatrixXd& m0, bool directed,
                                                   const std::vector<int>& labels, int q,
                                                   int block) {
  std::vector<int> members;
  for (int i = 0; i < static_cast<int>(labels.size()); ++i) {
    if (labels[static_cast<std::size_t>(i)] == block) members.push_back(i);
  }
  if (members.size() < 2) return std::nullopt;
  const Eigen::MatrixXd prof = block_profiles(mx, m0, directed, labels, q, members);
  const std::vector<int> sub = ward_cut(prof, 2);
  std::vector<int> out = labels;
  for (std::size_t a = 0; a < members.size(); ++a) {
    if (sub[a] == 1) out[static_cast<std::size_t>(members[a])] = q;  // new block
  }
  return out;
}

struct LevelScan {
  std::vector<SbmFit> fits;    // index q-1
  std::vector<double> icls;
  int best_q = 1;
  bool hit_cap = false;
};

LevelScan scan_level(const Eigen::MatrixXd& x, const Eigen::MatrixXd& mask, bool directed,
                     int q_max, const FitOptions& base, std::uint64_t seed_salt) {
  Eigen::MatrixXd mx, m0;
  observed_matrices(x, mask, mx, m0);

  FitOptions fo = base;
  fo.seed = Rng(base.seed).split(seed_salt).seed();

  LevelScan scan;
  scan.fits.reserve(static_cast<std::size_t>(q_max));
  for (int q = 1; q <= q_max; ++q) {
    if (q == 1) {
      std::vector<int> zeros(static_cast<std::size_t>(x.rows()), 0);
      scan.fits.push_back(fit_sbm(x, mask, directed, 1, fo, zeros));
    } else {
      // warm starts: every split of the previous best, plus a spectral seed
      const SbmFit& prev = scan.fits.back();
      std::vector<std::vector<int>> inits;
      for (int b = 0; b < q - 1; ++b) {
        auto lbl = split_block_labels(mx, m0, directed, prev.map_z, q - 1, b);
        if (lbl) inits.push_back(std::move(*lbl));
      }
      inits.push_back(init_clustering(mx, q, InitMethod::spectral,
                                      Rng(fo.seed).split(1000 + static_cast<std::uint64_t>(q)).seed()));
      std::vector<SbmFit> runs(inits.size());
      parallel_for(static_cast<int>(inits.size()), base.jobs, [&](int t) {
        runs[static_cast<std::size_t>(t)] =
            fit_sbm(x, mask, directed, q, fo, inits[static_cast<std::size_t>(t)]);
      });
      std::size_t best = 0;
      for (std::size_t t = 1; t < runs.size(); ++t) {
        if (runs[t].bound > runs[best].bound) best = t;
      }
      scan.fits.push_back(std::move(runs[best]));
    }
    SbmFit& f = scan.fits.back();
    f.icl = icl_sbm(x, mask, directed, f);
    scan.icls.push_back(f.icl);
    if (q > 1 && f.icl > scan.icls[static_cast<std::size_t>(scan.best_q - 1)]) {
      scan.best_q = q;
    }
  }
  scan.hit_cap = scan.best_q == q_max && q_max > 1;
  return scan;
}

}  // namespace

double penalty_mlvsbm(int q_ind, int q_org, int n_ind, int n_org,
                      bool directed_ind, bool directed_org) {
  if (q_ind < 1 || q_org < 1 || n_ind < 2 || n_org < 2) {
    throw ValidationError("penalty_mlvsbm: need q >= 1 and n >= 2");
  }
  return alpha_penalty(q_ind, n_ind, directed_ind) +
         static_cast<double>(q_org) * (q_ind - 1.0) / 2.0 * std::log(static_cast<double>(n_ind)) +
         alpha_penalty(q_org, n_org, directed_org) +
         (q_org - 1.0) / 2.0 * std::log(static_cast<double>(n_org));
}

double penalty_sbm(int q, int n, bool directed) {
  if (q < 1 || n < 2) throw ValidationError("penalty_sbm: need q >= 1 and n >= 2");
  return alpha_penalty(q, n, directed) +
         (q - 1.0) / 2.0 * std::log(static_cast<double>(n));
}

double icl_mlvsbm(const MultilevelNetwork& net, const FitResult& fit) {
  return complete_log_likelihood(net, fit.params, fit.map_assignments) -
         penalty_mlvsbm(fit.params.q_ind, fit.params.q_org, net.n_ind(), net.n_org(),
                        net.directed_ind, net.directed_org);
}

double icl_sbm(const Eigen::MatrixXd& x, const Eigen::MatrixXd& mask, bool directed,
               const SbmFit& fit) {
  return sbm_complete_log_likelihood(x, mask, directed, fit.pi, fit.alpha, fit.map_z) -
         penalty_sbm(fit.q, static_cast<int>(x.rows()), directed);
}

std::optional<std::vector<int>> propose_split(const MultilevelNetwork& net,
                                              const FitResult& fit, Level level,
                                              int block) {
  const bool ind = level == Level::ind;
  const int q = ind ? fit.params.q_ind : fit.params.q_org;
  if (block < 0 || block >= q) throw ValidationError("propose_split: block out of range");
  Eigen::MatrixXd mx, m0;
  observed_matrices(net.x(level), net.mask(level), mx, m0);
  const std::vector<int>& labels =
      ind ? fit.map_assignments.z_ind : fit.map_assignments.z_org;
  return split_block_labels(mx, m0, net.directed(level), labels, q, block);
}

std::vector<int> propose_merge(const std::vector<int>& labels, int block_a, int block_b) {
  if (block_a == block_b) throw ValidationError("propose_merge: blocks must differ");
  std::vector<int> out = labels;
  for (auto& l : out) {
    if (l == block_b) l = block_a;
  }
  // compact to a dense label range, order of first appearance
  std::map<int, int> remap;
  int next = 0;
  for (auto& l : out) {
    auto [it, fresh] = remap.emplace(l, next);
    if (fresh) ++next;
    l = it->second;
  }
  return out;
}

std::string to_string(Verdict v) {
  return v == Verdict::dependent ? "dependent" : "independent";
}

SelectionResult select(const MultilevelNetwork& net, const SelectOptions& options) {
  require_valid(net);
  require_valid(options.fit);
  if (options.q_max < 1) throw ValidationError("select: q_max must be >= 1");
  const int q_max_ind = std::min(options.q_max, net.n_ind());
  const int q_max_org = std::min(options.q_max, net.n_org());

  SelectionResult res;

  // independent baselines, one scan per level
  const LevelScan scan_ind =
      scan_level(net.x_ind, net.mask_ind, net.directed_ind, q_max_ind, options.fit, 21);
  const LevelScan scan_org =
      scan_level(net.x_org, net.mask_org, net.directed_org, q_max_org, options.fit, 22);
  res.icl_sbm_ind = scan_ind.icls;
  res.icl_sbm_org = scan_org.icls;
  res.independent_q = {scan_ind.best_q, scan_org.best_q};
  res.icl_independent = scan_ind.icls[static_cast<std::size_t>(scan_ind.best_q - 1)] +
                        scan_org.icls[static_cast<std::size_t>(scan_org.best_q - 1)];
  if (scan_ind.hit_cap) res.warnings.push_back("individual-level unilevel argmax hit the q_max cap");
  if (scan_org.hit_cap) res.warnings.push_back("organization-level unilevel argmax hit the q_max cap");

  // one-block margins decompose exactly into the two unilevel fits
  auto composed = [&](int qi, int qo) {
    const SbmFit& si = scan_ind.fits[static_cast<std::size_t>(qi - 1)];
    const SbmFit& so = scan_org.fits[static_cast<std::size_t>(qo - 1)];
    FitResult f;
    f.params.q_ind = qi;
    f.params.q_org = qo;
    f.params.directed_ind = net.directed_ind;
    f.params.directed_org = net.directed_org;
    f.params.pi_org = so.pi;
    f.params.alpha_ind = si.alpha;
    f.params.alpha_org = so.alpha;
    if (qi == 1) {
      f.params.gamma = Eigen::MatrixXd::Ones(1, qo);
    } else {
      f.params.gamma = si.pi;  // single organization block: column = block proportions
    }
    f.state = {si.tau, so.tau};
    f.bound = si.bound + so.bound;
    f.bound_trace = {f.bound};
    f.map_assignments = {si.map_z, so.map_z};
    f.n_iterations = std::max(si.n_iterations, so.n_iterations);
    f.converged = si.converged && so.converged;
    f.icl = si.icl + so.icl;
    f.warnings = si.warnings;
    f.warnings.insert(f.warnings.end(), so.warnings.begin(), so.warnings.end());
    return f;
  };

  auto fit_pair = [&](int qi, int qo, const InitSpec& init) {
    if (qi == 1 || qo == 1) return composed(qi, qo);
    FitResult f = fit(net, qi, qo, options.fit, init);
    f.icl = icl_mlvsbm(net, f);
    return f;
  };

  auto note = [&](const std::string& move, int qi, int qo, double icl) {
    auto [it, fresh] = res.explored.emplace(std::make_pair(qi, qo), icl);
    if (!fresh) it->second = std::max(it->second, icl);
    res.search_trace.push_back({move, qi, qo, icl});
  };

  FitResult current;
  if (options.exhaustive) {
    bool have = false;
    for (int qi = 1; qi <= q_max_ind; ++qi) {
      for (int qo = 1; qo <= q_max_org; ++qo) {
        FitResult f = fit_pair(qi, qo, {});
        note("grid", qi, qo, f.icl);
        if (!have || f.icl > current.icl) {
          current = std::move(f);
          have = true;
        }
      }
    }
  } else {
    const int qi0 = scan_ind.best_q, qo0 = scan_org.best_q;
    InitSpec start;
    start.soft = VariationalState{scan_ind.fits[static_cast<std::size_t>(qi0 - 1)].tau,
                                  scan_org.fits[static_cast<std::size_t>(qo0 - 1)].tau};
    current = fit_pair(qi0, qo0, start);
    note("start", qi0, qo0, current.icl);

    struct Candidate {
      std::string move;
      int qi = 0, qo = 0;
      InitSpec init;
      bool is_margin = false;
    };

    const int max_rounds = 200;
    for (int round = 0; round < max_rounds; ++round) {
      const int qi = current.params.q_ind, qo = current.params.q_org;
      std::vector<Candidate> cands;

      auto add_margin = [&](const std::string& move, int tqi, int tqo) {
        cands.push_back({move, tqi, tqo, {}, true});
      };

      // splits and merges on the individual level
      if (qi + 1 <= q_max_ind) {
        for (int b = 0; b < qi; ++b) {
          auto lbl = propose_split(net, current, Level::ind, b);
          if (!lbl) continue;
          Candidate c{"split-ind", qi + 1, qo, {}, false};
          c.init.soft = VariationalState{one_hot(*lbl, qi + 1), current.state.tau_org};
          cands.push_back(std::move(c));
        }
      }
      if (qi - 1 >= 1) {
        if (qi - 1 == 1) {
          add_margin("merge-ind", 1, qo);
        } else {
          for (int a = 0; a < qi; ++a) {
            for (int b = a + 1; b < qi; ++b) {
              Candidate c{"merge-ind", qi - 1, qo, {}, false};
              c.init.soft = VariationalState{
                  one_hot(propose_merge(current.map_assignments.z_ind, a, b), qi - 1),
                  current.state.tau_org};
              cands.push_back(std::move(c));
            }
          }
        }
      }
      // organization level
      if (qo + 1 <= q_max_org) {
        if (qi == 1) {
          add_margin("split-org", qi, qo + 1);
        } else {
          for (int b = 0; b < qo; ++b) {
            auto lbl = propose_split(net, current, Level::org, b);
            if (!lbl) continue;
            Candidate c{"split-org", qi, qo + 1, {}, false};
            c.init.soft = VariationalState{current.state.tau_ind, one_hot(*lbl, qo + 1)};
            cands.push_back(std::move(c));
          }
        }
      }
      if (qo - 1 >= 1) {
        if (qo - 1 == 1 || qi == 1) {
          add_margin("merge-org", qi, std::max(1, qo - 1));
        } else {
          for (int a = 0; a < qo; ++a) {
            for (int b = a + 1; b < qo; ++b) {
              Candidate c{"merge-org", qi, qo - 1, {}, false};
              c.init.soft = VariationalState{
                  current.state.tau_ind,
                  one_hot(propose_merge(current.map_assignments.z_org, a, b), qo - 1)};
              cands.push_back(std::move(c));
            }
          }
        }
      }
      // margin pairs decompose and ignore the init; keep one candidate each
      {
        std::set<std::pair<int, int>> seen;
        std::vector<Candidate> uniq;
        for (auto& c : cands) {
          c.is_margin = c.qi == 1 || c.qo == 1;
          if (c.is_margin && !seen.insert({c.qi, c.qo}).second) continue;
          uniq.push_back(std::move(c));
        }
        cands = std::move(uniq);
      }
      if (cands.empty()) break;

      std::vector<FitResult> fits(cands.size());
      // neighbor fits are independent; errors skip the neighbor
      std::vector<std::string> failures(cands.size());
      parallel_for(static_cast<int>(cands.size()), options.fit.jobs, [&](int t) {
        const auto& c = cands[static_cast<std::size_t>(t)];
        try {
          fits[static_cast<std::size_t>(t)] = fit_pair(c.qi, c.qo, c.init);
        } catch (const std::exception& e) {
          failures[static_cast<std::size_t>(t)] = e.what();
          fits[static_cast<std::size_t>(t)].icl = -std::numeric_limits<double>::infinity();
        }
      });
      int best = -1;
      for (int t = 0; t < static_cast<int>(cands.size()); ++t) {
        const auto& c = cands[static_cast<std::size_t>(t)];
        if (!failures[static_cast<std::size_t>(t)].empty()) {
          res.search_trace.push_back({c.move + " (failed: " +
                                          failures[static_cast<std::size_t>(t)] + ")",
                                      c.qi, c.qo,
                                      -std::numeric_limits<double>::infinity()});
          continue;
        }
        note(c.move, c.qi, c.qo, fits[static_cast<std::size_t>(t)].icl);
        if (best < 0 || fits[static_cast<std::size_t>(t)].icl >
                            fits[static_cast<std::size_t>(best)].icl) {
          best = t;
        }
      }
      if (best < 0 || !(fits[static_cast<std::size_t>(best)].icl > current.icl)) break;
      current = std::move(fits[static_cast<std::size_t>(best)]);
      if (round == max_rounds - 1) {
        res.warnings.push_back("search stopped at the round cap");
      }
    }
  }

  res.best_fit = std::move(current);
  res.best_q = {res.best_fit.params.q_ind, res.best_fit.params.q_org};
  res.verdict =
      res.icl_independent >= res.best_fit.icl ? Verdict::independent : Verdict::dependent;
  return res;
}

}  // namespace mlvsbm
