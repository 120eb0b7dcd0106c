#include "mlvsbm/vem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "mlvsbm/parallel.hpp"
#include "mlvsbm/rng.hpp"

namespace mlvsbm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log with a hard floor, for additive fields where -inf would poison
// products; exact zero handling lives in the likelihood accumulators.
double slog(double v) { return std::log(std::max(v, 1e-300)); }

Eigen::MatrixXd slog_mat(const Eigen::MatrixXd& m) {
  return m.unaryExpr([](double v) { return slog(v); });
}

Eigen::MatrixXd slog1m_mat(const Eigen::MatrixXd& m) {
  return m.unaryExpr([](double v) { return std::log(std::max(1.0 - v, 1e-300)); });
}

// Adjacency restricted to observed off-diagonal dyads. Masked x entries are
// never read (they may hold arbitrary values).
struct LevelView {
  Eigen::MatrixXd mx;  // observed edges
  Eigen::MatrixXd m0;  // observed dyads
  bool directed = false;
  double observed = 0.0;
  double edges = 0.0;
  double density = 0.0;
};

LevelView make_view(const Eigen::MatrixXd& x, const Eigen::MatrixXd& mask, bool directed) {
  const int n = static_cast<int>(x.rows());
  LevelView v;
  v.directed = directed;
  v.mx = Eigen::MatrixXd::Zero(n, n);
  v.m0 = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j || mask(i, j) != 1.0) continue;
      v.m0(i, j) = 1.0;
      v.mx(i, j) = x(i, j) == 1.0 ? 1.0 : 0.0;
    }
  }
  v.observed = v.m0.sum();
  v.edges = v.mx.sum();
  v.density = v.observed > 0.0 ? v.edges / v.observed : 0.0;
  return v;
}

// Expected (or exact, for one-hot tau) log-likelihood of the level's dyads.
// Treats zero counts against degenerate alpha as 0, positive counts as -inf.
double pair_term(const Eigen::MatrixXd& n1, const Eigen::MatrixXd& nt,
                 const Eigen::MatrixXd& alpha, bool directed) {
  double s = 0.0;
  for (int k = 0; k < alpha.rows(); ++k) {
    for (int l = 0; l < alpha.cols(); ++l) {
      const double e1 = n1(k, l);
      const double e0 = nt(k, l) - n1(k, l);
      const double a = alpha(k, l);
      if (e1 > 0.0) {
        if (a <= 0.0) return kNegInf;
        s += e1 * std::log(a);
      }
      if (e0 > 0.0) {
        if (a >= 1.0) return kNegInf;
        s += e0 * std::log1p(-a);
      }
    }
  }
  return directed ? s : 0.5 * s;
}

double pair_bound(const LevelView& v, const Eigen::MatrixXd& tau,
                  const Eigen::MatrixXd& alpha) {
  const Eigen::MatrixXd n1 = tau.transpose() * v.mx * tau;
  const Eigen::MatrixXd nt = tau.transpose() * v.m0 * tau;
  return pair_term(n1, nt, alpha, v.directed);
}

// sum of w * log p with 0 * log 0 = 0
double weighted_log(const Eigen::MatrixXd& w, const Eigen::MatrixXd& p) {
  double s = 0.0;
  for (int i = 0; i < w.rows(); ++i) {
    for (int j = 0; j < w.cols(); ++j) {
      if (w(i, j) <= 0.0) continue;
      if (p(i, j) <= 0.0) return kNegInf;
      s += w(i, j) * std::log(p(i, j));
    }
  }
  return s;
}

double entropy(const Eigen::MatrixXd& tau) {
  double h = 0.0;
  for (int i = 0; i < tau.rows(); ++i) {
    for (int j = 0; j < tau.cols(); ++j) {
      const double t = tau(i, j);
      if (t > 0.0) h -= t * std::log(t);
    }
  }
  return h;
}

Eigen::MatrixXd alpha_hat(const LevelView& v, const Eigen::MatrixXd& tau,
                          std::vector<std::string>* warnings, const char* level) {
  const int q = static_cast<int>(tau.cols());
  const Eigen::MatrixXd n1 = tau.transpose() * v.mx * tau;
  const Eigen::MatrixXd nt = tau.transpose() * v.m0 * tau;
  const Eigen::VectorXd occ = tau.colwise().sum();
  Eigen::MatrixXd alpha(q, q);
  for (int k = 0; k < q; ++k) {
    for (int l = 0; l < q; ++l) {
      if (nt(k, l) > 0.0) {
        alpha(k, l) = n1(k, l) / nt(k, l);
      } else {
        alpha(k, l) = v.density;  // degenerate pair, fall back to the mean
      }
    }
  }
  if (warnings != nullptr) {
    for (int k = 0; k < q; ++k) {
      if (occ[k] == 0.0) {
        warnings->push_back(std::string("m_step: empty block ") + std::to_string(k) +
                            " on " + level + " level, alpha row/column set to density");
      }
    }
  }
  if (!v.directed) alpha = 0.5 * (alpha + alpha.transpose()).eval();
  return alpha.array().min(1.0 - kAlphaClamp).max(kAlphaClamp);
}

// Exact maximizer of the row objective over the floor-constrained simplex:
// softmax, entries below the floor pinned to it, remaining mass spread over
// the rest in softmax proportion.
void floored_softmax_row(Eigen::RowVectorXd& f) {
  const int q = static_cast<int>(f.size());
  if (q == 1) {
    f[0] = 1.0;
    return;
  }
  const double m = f.maxCoeff();
  f = (f.array() - m).exp();
  f /= f.sum();
  int n_low = 0;
  for (int l = 0; l < q; ++l) {
    if (f[l] < kTauFloor) ++n_low;
  }
  if (n_low > 0 && n_low < q) {
    double s_high = 0.0;
    for (int l = 0; l < q; ++l) {
      if (f[l] >= kTauFloor) s_high += f[l];
    }
    const double scale = (1.0 - static_cast<double>(n_low) * kTauFloor) / s_high;
    for (int l = 0; l < q; ++l) {
      f[l] = f[l] < kTauFloor ? kTauFloor : f[l] * scale;
    }
    // rescaling may nudge a boundary entry a hair below the floor
    for (int l = 0; l < q; ++l) f[l] = std::max(f[l], kTauFloor);
  }
}

// Sequential row updates for one level. `prior` carries the additive
// cross-level and mixing fields. Returns the largest row change.
void update_level_rows(const LevelView& v, const Eigen::MatrixXd& prior,
                       const Eigen::MatrixXd& la, const Eigen::MatrixXd& lb,
                       double damping, Eigen::MatrixXd& tau, double& maxdiff) {
  const int n = static_cast<int>(tau.rows());
  const int q = static_cast<int>(tau.cols());
  if (q == 1) return;
  Eigen::RowVectorXd out1(q), out0(q), in1(q), in0(q), f(q);
  for (int r = 0; r < n; ++r) {
    out1.noalias() = v.mx.row(r) * tau;
    out0.noalias() = v.m0.row(r) * tau;
    out0 -= out1;
    f = prior.row(r);
    f.noalias() += out1 * la.transpose();
    f.noalias() += out0 * lb.transpose();
    if (v.directed) {
      in1.noalias() = v.mx.col(r).transpose() * tau;
      in0.noalias() = v.m0.col(r).transpose() * tau;
      in0 -= in1;
      f.noalias() += in1 * la;
      f.noalias() += in0 * lb;
    }
    floored_softmax_row(f);
    if (damping < 1.0) {
      f = damping * f + (1.0 - damping) * tau.row(r);
    }
    maxdiff = std::max(maxdiff, (f - tau.row(r)).cwiseAbs().maxCoeff());
    tau.row(r) = f;
  }
}

struct SweepStats {
  int sweeps = 0;
  bool converged = false;
};

class Engine {
 public:
  Engine(const MultilevelNetwork& net, int q_ind, int q_org, bool constrained)
      : vi_(make_view(net.x_ind, net.mask_ind, net.directed_ind)),
        vo_(make_view(net.x_org, net.mask_org, net.directed_org)),
        aff_(net.affiliation),
        aff_colsum_(net.affiliation.colwise().sum()),
        qi_(q_ind),
        qo_(q_org),
        constrained_(constrained) {}

  const LevelView& ind() const { return vi_; }
  const LevelView& org() const { return vo_; }

  ModelParams m_step(const VariationalState& s, std::vector<std::string>* warnings) const {
    ModelParams p;
    p.q_ind = qi_;
    p.q_org = qo_;
    p.directed_ind = vi_.directed;
    p.directed_org = vo_.directed;
    p.pi_org = s.tau_org.colwise().mean();
    p.alpha_ind = alpha_hat(vi_, s.tau_ind, warnings, "individual");
    p.alpha_org = alpha_hat(vo_, s.tau_org, warnings, "organization");
    if (constrained_) {
      const Eigen::VectorXd rho = s.tau_ind.colwise().mean();
      p.gamma = rho.replicate(1, qo_);
    } else {
      const Eigen::MatrixXd num = s.tau_ind.transpose() * aff_ * s.tau_org;
      const Eigen::VectorXd den = s.tau_org.transpose() * aff_colsum_;
      p.gamma.resize(qi_, qo_);
      for (int l = 0; l < qo_; ++l) {
        if (den[l] > 0.0) {
          p.gamma.col(l) = num.col(l) / den[l];
          p.gamma.col(l) /= p.gamma.col(l).sum();
        } else {
          p.gamma.col(l).setConstant(1.0 / static_cast<double>(qi_));
          if (warnings != nullptr) {
            warnings->push_back("m_step: organization block " + std::to_string(l) +
                                " affiliates no individuals, gamma column set uniform");
          }
        }
      }
    }
    return p;
  }

  double bound(const ModelParams& p, const VariationalState& s) const {
    double total = pair_bound(vi_, s.tau_ind, p.alpha_ind);
    if (total == kNegInf) return kNegInf;
    const double org_pairs = pair_bound(vo_, s.tau_org, p.alpha_org);
    if (org_pairs == kNegInf) return kNegInf;
    total += org_pairs;
    const Eigen::MatrixXd cs = s.tau_org.colwise().sum();
    const double pi_term = weighted_log(cs, p.pi_org.transpose());
    if (pi_term == kNegInf) return kNegInf;
    total += pi_term;
    const Eigen::MatrixXd w = s.tau_ind.transpose() * aff_ * s.tau_org;
    const double gamma_term = weighted_log(w, p.gamma);
    if (gamma_term == kNegInf) return kNegInf;
    total += gamma_term;
    return total + entropy(s.tau_ind) + entropy(s.tau_org);
  }

  SweepStats ve_sweeps(const ModelParams& p, VariationalState& s,
                       const FitOptions& o) const {
    const Eigen::MatrixXd la_i = slog_mat(p.alpha_ind);
    const Eigen::MatrixXd lb_i = slog1m_mat(p.alpha_ind);
    const Eigen::MatrixXd la_o = slog_mat(p.alpha_org);
    const Eigen::MatrixXd lb_o = slog1m_mat(p.alpha_org);
    const Eigen::MatrixXd lg = slog_mat(p.gamma);
    const Eigen::RowVectorXd lpi = p.pi_org.unaryExpr([](double v) { return slog(v); }).transpose();

    SweepStats st;
    for (int sweep = 0; sweep < o.max_fixed_point_sweeps; ++sweep) {
      double maxdiff = 0.0;
      ++st.sweeps;
      // organization rows first, against the current individual state
      Eigen::MatrixXd prior_o = aff_.transpose() * (s.tau_ind * lg);
      prior_o.rowwise() += lpi;
      update_level_rows(vo_, prior_o, la_o, lb_o, o.damping, s.tau_org, maxdiff);
      // individual rows against the refreshed organization state
      const Eigen::MatrixXd prior_i = aff_ * (s.tau_org * lg.transpose());
      update_level_rows(vi_, prior_i, la_i, lb_i, o.damping, s.tau_ind, maxdiff);
      if (maxdiff < o.fixed_point_tolerance) {
        st.converged = true;
        break;
      }
    }
    return st;
  }

  double residual(const ModelParams& p, const VariationalState& s) const {
    const Eigen::MatrixXd la_i = slog_mat(p.alpha_ind);
    const Eigen::MatrixXd lb_i = slog1m_mat(p.alpha_ind);
    const Eigen::MatrixXd la_o = slog_mat(p.alpha_org);
    const Eigen::MatrixXd lb_o = slog1m_mat(p.alpha_org);
    const Eigen::MatrixXd lg = slog_mat(p.gamma);
    const Eigen::RowVectorXd lpi = p.pi_org.unaryExpr([](double v) { return slog(v); }).transpose();

    double res = 0.0;
    Eigen::MatrixXd prior_o = aff_.transpose() * (s.tau_ind * lg);
    prior_o.rowwise() += lpi;
    {
      double d = 0.0;
      Eigen::MatrixXd tau = s.tau_org;
      update_level_rows(vo_, prior_o, la_o, lb_o, 1.0, tau, d);
      res = std::max(res, (tau - s.tau_org).cwiseAbs().maxCoeff());
    }
    {
      const Eigen::MatrixXd prior_i = aff_ * (s.tau_org * lg.transpose());
      double d = 0.0;
      Eigen::MatrixXd tau = s.tau_ind;
      update_level_rows(vi_, prior_i, la_i, lb_i, 1.0, tau, d);
      res = std::max(res, (tau - s.tau_ind).cwiseAbs().maxCoeff());
    }
    return res;
  }

 private:
  LevelView vi_, vo_;
  Eigen::MatrixXd aff_;
  Eigen::VectorXd aff_colsum_;
  int qi_, qo_;
  bool constrained_;
};

// Hard-assignment log-likelihood pieces, scalar loops so masked entries and
// degenerate parameters are handled exactly.
double hard_pair_ll(const Eigen::MatrixXd& x, const Eigen::MatrixXd& mask, bool directed,
                    const Eigen::MatrixXd& alpha, const std::vector<int>& z) {
  const int n = static_cast<int>(x.rows());
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = directed ? 0 : i + 1; j < n; ++j) {
      if (i == j || mask(i, j) != 1.0) continue;
      const double a = alpha(z[static_cast<std::size_t>(i)], z[static_cast<std::size_t>(j)]);
      if (x(i, j) == 1.0) {
        if (a <= 0.0) return kNegInf;
        s += std::log(a);
      } else {
        if (a >= 1.0) return kNegInf;
        s += std::log1p(-a);
      }
    }
  }
  return s;
}

double hard_prior_ll(const Eigen::VectorXd& pi, const std::vector<int>& z) {
  double s = 0.0;
  for (int zi : z) {
    const double p = pi[zi];
    if (p <= 0.0) return kNegInf;
    s += std::log(p);
  }
  return s;
}

// Initial states live inside the floor-constrained simplex, so every later
// row update is an exact ascent step.
Eigen::MatrixXd floored_one_hot(const std::vector<int>& labels, int q) {
  Eigen::MatrixXd tau = one_hot(labels, q);
  if (q > 1) {
    tau = tau.unaryExpr([q](double v) {
      return v == 1.0 ? 1.0 - (q - 1) * kTauFloor : kTauFloor;
    });
  }
  return tau;
}

void floor_rows(Eigen::MatrixXd& tau) {
  if (tau.cols() == 1) {
    tau.setOnes();
    return;
  }
  for (int i = 0; i < tau.rows(); ++i) {
    tau.row(i) = tau.row(i).cwiseMax(kTauFloor);
    tau.row(i) /= tau.row(i).sum();
    tau.row(i) = tau.row(i).cwiseMax(kTauFloor);
  }
}

VariationalState state_from_labels(const std::vector<int>& z_ind,
                                   const std::vector<int>& z_org, int qi, int qo) {
  return {floored_one_hot(z_ind, qi), floored_one_hot(z_org, qo)};
}

struct RunOut {
  ModelParams params;
  VariationalState state;
  double bound = kNegInf;
  std::vector<double> trace;
  int iterations = 0;
  bool converged = false;
  std::vector<std::string> warnings;
};

RunOut run_mlvsbm(const Engine& eng, VariationalState tau, const FitOptions& o) {
  RunOut out;
  int sweep_cap_hits = 0;
  ModelParams params = eng.m_step(tau, &out.warnings);
  out.trace.push_back(eng.bound(params, tau));
  for (int t = 0; t < o.max_outer_iterations; ++t) {
    const SweepStats st = eng.ve_sweeps(params, tau, o);
    if (!st.converged) ++sweep_cap_hits;
    params = eng.m_step(tau, nullptr);
    const double b = eng.bound(params, tau);
    out.trace.push_back(b);
    const double prev = out.trace[out.trace.size() - 2];
    if (std::abs(b - prev) <= o.bound_rel_tolerance * (1.0 + std::abs(prev))) {
      out.converged = true;
      break;
    }
  }
  out.iterations = static_cast<int>(out.trace.size()) - 1;
  out.bound = out.trace.back();
  out.params = std::move(params);
  out.state = std::move(tau);
  if (sweep_cap_hits > 0) {
    out.warnings.push_back("fixed-point sweep cap reached in " +
                           std::to_string(sweep_cap_hits) + " outer iterations");
  }
  return out;
}

std::vector<int> perturb_labels(const std::vector<int>& base, int q, Rng& rng) {
  std::vector<int> out = base;
  for (auto& l : out) {
    if (rng.bernoulli(0.15)) l = static_cast<int>(rng.uniform_below(q));
  }
  return out;
}

}  // namespace

void require_valid(const FitOptions& o) {
  if (o.max_outer_iterations < 1) throw ValidationError("max_outer_iterations must be >= 1");
  if (!(o.bound_rel_tolerance > 0.0)) throw ValidationError("bound_rel_tolerance must be > 0");
  if (o.max_fixed_point_sweeps < 1) throw ValidationError("max_fixed_point_sweeps must be >= 1");
  if (!(o.fixed_point_tolerance > 0.0)) throw ValidationError("fixed_point_tolerance must be > 0");
  if (o.n_random_restarts < 1) throw ValidationError("n_random_restarts must be >= 1");
  if (!(o.damping > 0.0 && o.damping <= 1.0)) throw ValidationError("damping must be in (0,1]");
  if (o.jobs < 1) throw ValidationError("jobs must be >= 1");
}

Eigen::MatrixXd one_hot(const std::vector<int>& labels, int q) {
  Eigen::MatrixXd tau = Eigen::MatrixXd::Zero(static_cast<int>(labels.size()), q);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= q) {
      throw ValidationError("label " + std::to_string(labels[i]) + " outside [0," +
                            std::to_string(q) + ")");
    }
    tau(static_cast<int>(i), labels[i]) = 1.0;
  }
  return tau;
}

std::vector<int> map_labels(const Eigen::MatrixXd& tau) {
  std::vector<int> z(static_cast<std::size_t>(tau.rows()));
  for (int i = 0; i < tau.rows(); ++i) {
    int best = 0;
    for (int k = 1; k < tau.cols(); ++k) {
      if (tau(i, k) > tau(i, best)) best = k;
    }
    z[static_cast<std::size_t>(i)] = best;
  }
  return z;
}

double complete_log_likelihood(const MultilevelNetwork& net, const ModelParams& params,
                               const Assignments& z) {
  if (static_cast<int>(z.z_ind.size()) != net.n_ind() ||
      static_cast<int>(z.z_org.size()) != net.n_org()) {
    throw ValidationError("complete_log_likelihood: assignment length mismatch");
  }
  const double pi_term = hard_prior_ll(params.pi_org, z.z_org);
  if (pi_term == kNegInf) return kNegInf;
  double gamma_term = 0.0;
  const auto orgs = net.org_of();
  for (int i = 0; i < net.n_ind(); ++i) {
    const double g = params.gamma(z.z_ind[static_cast<std::size_t>(i)],
                                  z.z_org[static_cast<std::size_t>(orgs[static_cast<std::size_t>(i)])]);
    if (g <= 0.0) return kNegInf;
    gamma_term += std::log(g);
  }
  const double ind_pairs = hard_pair_ll(net.x_ind, net.mask_ind, net.directed_ind,
                                        params.alpha_ind, z.z_ind);
  if (ind_pairs == kNegInf) return kNegInf;
  const double org_pairs = hard_pair_ll(net.x_org, net.mask_org, net.directed_org,
                                        params.alpha_org, z.z_org);
  if (org_pairs == kNegInf) return kNegInf;
  return pi_term + gamma_term + ind_pairs + org_pairs;
}

double variational_bound(const MultilevelNetwork& net, const ModelParams& params,
                         const VariationalState& state) {
  Engine eng(net, params.q_ind, params.q_org, false);
  return eng.bound(params, state);
}

double exact_log_likelihood(const MultilevelNetwork& net, const ModelParams& params) {
  const int ni = net.n_ind(), no = net.n_org();
  const int qi = params.q_ind, qo = params.q_org;
  const double combos = std::pow(static_cast<double>(qi), ni) *
                        std::pow(static_cast<double>(qo), no);
  if (!(combos <= 1e7)) {
    throw NumericalError("exact_log_likelihood: q_ind^n_ind * q_org^n_org exceeds 1e7");
  }
  const auto orgs = net.org_of();

  double max_ll = kNegInf;
  double sum_scaled = 0.0;
  auto accumulate = [&](double ll) {
    if (ll == kNegInf) return;
    if (ll <= max_ll) {
      sum_scaled += std::exp(ll - max_ll);
    } else {
      sum_scaled = sum_scaled * std::exp(max_ll - ll) + 1.0;
      max_ll = ll;
    }
  };

  std::vector<int> z_org(static_cast<std::size_t>(no), 0);
  std::vector<int> z_ind(static_cast<std::size_t>(ni), 0);
  for (;;) {
    double base = hard_prior_ll(params.pi_org, z_org);
    if (base != kNegInf) {
      base += hard_pair_ll(net.x_org, net.mask_org, net.directed_org, params.alpha_org, z_org);
    }
    if (base != kNegInf) {
      std::fill(z_ind.begin(), z_ind.end(), 0);
      for (;;) {
        double ll = base;
        for (int i = 0; i < ni && ll != kNegInf; ++i) {
          const double g = params.gamma(z_ind[static_cast<std::size_t>(i)],
                                        z_org[static_cast<std::size_t>(orgs[static_cast<std::size_t>(i)])]);
          ll = g <= 0.0 ? kNegInf : ll + std::log(g);
        }
        if (ll != kNegInf) {
          ll += hard_pair_ll(net.x_ind, net.mask_ind, net.directed_ind, params.alpha_ind, z_ind);
        }
        accumulate(ll);
        int d = 0;
        while (d < ni && ++z_ind[static_cast<std::size_t>(d)] == qi) {
          z_ind[static_cast<std::size_t>(d)] = 0;
          ++d;
        }
        if (d == ni) break;
      }
    }
    int d = 0;
    while (d < no && ++z_org[static_cast<std::size_t>(d)] == qo) {
      z_org[static_cast<std::size_t>(d)] = 0;
      ++d;
    }
    if (d == no) break;
  }
  if (max_ll == kNegInf) return kNegInf;
  return max_ll + std::log(sum_scaled);
}

double sbm_complete_log_likelihood(const Eigen::MatrixXd& x, const Eigen::MatrixXd& mask,
                                   bool directed, const Eigen::VectorXd& pi,
                                   const Eigen::MatrixXd& alpha, const std::vector<int>& z) {
  const double prior = hard_prior_ll(pi, z);
  if (prior == kNegInf) return kNegInf;
  const double pairs = hard_pair_ll(x, mask, directed, alpha, z);
  return pairs == kNegInf ? kNegInf : prior + pairs;
}

double sbm_variational_bound(const Eigen::MatrixXd& x, const Eigen::MatrixXd& mask,
                             bool directed, const Eigen::VectorXd& pi,
                             const Eigen::MatrixXd& alpha, const Eigen::MatrixXd& tau) {
  const LevelView v = make_view(x, mask, directed);
  const double pairs = pair_bound(v, tau, alpha);
  if (pairs == kNegInf) return kNegInf;
  const Eigen::MatrixXd cs = tau.colwise().sum();
  const double prior = weighted_log(cs, pi.transpose());
  if (prior == kNegInf) return kNegInf;
  return pairs + prior + entropy(tau);
}

ModelParams m_step(const MultilevelNetwork& net, const VariationalState& state,
                   bool constrained_independent_gamma, std::vector<std::string>* warnings) {
  Engine eng(net, static_cast<int>(state.tau_ind.cols()),
             static_cast<int>(state.tau_org.cols()), constrained_independent_gamma);
  return eng.m_step(state, warnings);
}

VariationalState ve_step(const MultilevelNetwork& net, const ModelParams& params,
                         const VariationalState& state, const FitOptions& options) {
  require_valid(options);
  Engine eng(net, params.q_ind, params.q_org, false);
  VariationalState s = state;
  eng.ve_sweeps(params, s, options);
  return s;
}

double fixed_point_residual(const MultilevelNetwork& net, const ModelParams& params,
                            const VariationalState& state) {
  Engine eng(net, params.q_ind, params.q_org, false);
  return eng.residual(params, state);
}

FitResult fit(const MultilevelNetwork& net, int q_ind, int q_org,
              const FitOptions& options, const InitSpec& init) {
  require_valid(options);
  if (q_ind < 1 || q_org < 1) throw ValidationError("fit: block counts must be >= 1");
  if (q_ind > net.n_ind() || q_org > net.n_org()) {
    throw ValidationError("fit: more blocks than nodes");
  }
  Engine eng(net, q_ind, q_org, options.constrained_independent_gamma);
  if (eng.ind().observed == 0.0 && q_ind > 1) {
    throw NumericalError("fit: individual level has no observed dyads but q_ind > 1");
  }
  if (eng.org().observed == 0.0 && q_org > 1) {
    throw NumericalError("fit: organization level has no observed dyads but q_org > 1");
  }

  std::vector<VariationalState> inits;
  if (!init.empty()) {
    if (init.soft) {
      if (init.soft->tau_ind.rows() != net.n_ind() || init.soft->tau_ind.cols() != q_ind ||
          init.soft->tau_org.rows() != net.n_org() || init.soft->tau_org.cols() != q_org) {
        throw ValidationError("fit: init state shape mismatch");
      }
      VariationalState s = *init.soft;
      floor_rows(s.tau_ind);
      floor_rows(s.tau_org);
      inits.push_back(std::move(s));
    } else {
      inits.push_back(state_from_labels(init.hard->z_ind, init.hard->z_org, q_ind, q_org));
    }
  } else {
    const Rng root(options.seed);
    std::vector<int> base_i, base_o;
    if (options.init_method != InitMethod::random) {
      base_i = init_clustering(eng.ind().mx, q_ind, options.init_method, root.split(11).seed());
      base_o = init_clustering(eng.org().mx, q_org, options.init_method, root.split(12).seed());
      inits.push_back(state_from_labels(base_i, base_o, q_ind, q_org));
    }
    const int first_random = static_cast<int>(inits.size());
    for (int r = first_random; r < options.n_random_restarts; ++r) {
      Rng rr = root.split(100 + static_cast<std::uint64_t>(r));
      std::vector<int> zi, zo;
      if (options.init_method == InitMethod::random) {
        zi.resize(static_cast<std::size_t>(net.n_ind()));
        for (auto& l : zi) l = static_cast<int>(rr.uniform_below(q_ind));
        zo.resize(static_cast<std::size_t>(net.n_org()));
        for (auto& l : zo) l = static_cast<int>(rr.uniform_below(q_org));
      } else {
        zi = perturb_labels(base_i, q_ind, rr);
        zo = perturb_labels(base_o, q_org, rr);
      }
      inits.push_back(state_from_labels(zi, zo, q_ind, q_org));
    }
  }

  std::vector<RunOut> runs(inits.size());
  parallel_for(static_cast<int>(inits.size()), options.jobs,
               [&](int r) { runs[static_cast<std::size_t>(r)] =
                                run_mlvsbm(eng, inits[static_cast<std::size_t>(r)], options); });

  std::size_t best = 0;
  for (std::size_t r = 1; r < runs.size(); ++r) {
    if (runs[r].bound > runs[best].bound) best = r;
  }
  RunOut& win = runs[best];

  FitResult res;
  res.params = std::move(win.params);
  res.state = std::move(win.state);
  res.bound = win.bound;
  res.bound_trace = std::move(win.trace);
  res.map_assignments = {map_labels(res.state.tau_ind), map_labels(res.state.tau_org)};
  res.n_iterations = win.iterations;
  res.converged = win.converged;
  std::set<std::string> uniq(win.warnings.begin(), win.warnings.end());
  res.warnings.assign(uniq.begin(), uniq.end());
  return res;
}

SbmFit fit_sbm(const Eigen::MatrixXd& x, const Eigen::MatrixXd& mask, bool directed,
               int q, const FitOptions& options,
               const std::optional<std::vector<int>>& init_labels,
               const std::optional<Eigen::MatrixXd>& init_tau) {
  require_valid(options);
  const int n = static_cast<int>(x.rows());
  if (x.cols() != n || mask.rows() != n || mask.cols() != n) {
    throw ValidationError("fit_sbm: adjacency and mask must be square and matching");
  }
  if (q < 1 || q > n) throw ValidationError("fit_sbm: need 1 <= q <= n");
  const LevelView v = make_view(x, mask, directed);
  if (v.observed == 0.0 && q > 1) {
    throw NumericalError("fit_sbm: no observed dyads but q > 1");
  }

  // one-level engine on the same kernels
  auto msro = [&](const Eigen::MatrixXd& tau, std::vector<std::string>* w) {
    struct P { Eigen::VectorXd pi; Eigen::MatrixXd alpha; } p;
    p.pi = tau.colwise().mean();
    p.alpha = alpha_hat(v, tau, w, "single");
    return p;
  };
  auto bnd = [&](const Eigen::VectorXd& pi, const Eigen::MatrixXd& alpha,
                 const Eigen::MatrixXd& tau) {
    const double pairs = pair_bound(v, tau, alpha);
    if (pairs == kNegInf) return kNegInf;
    const Eigen::MatrixXd cs = tau.colwise().sum();
    const double prior = weighted_log(cs, pi.transpose());
    if (prior == kNegInf) return kNegInf;
    return pairs + prior + entropy(tau);
  };
  auto sweeps = [&](const Eigen::VectorXd& pi, const Eigen::MatrixXd& alpha,
                    Eigen::MatrixXd& tau) {
    const Eigen::MatrixXd la = slog_mat(alpha);
    const Eigen::MatrixXd lb = slog1m_mat(alpha);
    const Eigen::RowVectorXd lpi =
        pi.unaryExpr([](double t) { return slog(t); }).transpose();
    const Eigen::MatrixXd prior = lpi.replicate(n, 1);
    SweepStats st;
    for (int sweep = 0; sweep < options.max_fixed_point_sweeps; ++sweep) {
      double maxdiff = 0.0;
      ++st.sweeps;
      update_level_rows(v, prior, la, lb, options.damping, tau, maxdiff);
      if (maxdiff < options.fixed_point_tolerance) {
        st.converged = true;
        break;
      }
    }
    return st;
  };

  struct SbmRun {
    Eigen::VectorXd pi;
    Eigen::MatrixXd alpha, tau;
    double bound = kNegInf;
    std::vector<double> trace;
    int iterations = 0;
    bool converged = false;
    std::vector<std::string> warnings;
  };
  auto run_one = [&](Eigen::MatrixXd tau) {
    SbmRun out;
    int cap_hits = 0;
    auto p = msro(tau, &out.warnings);
    out.trace.push_back(bnd(p.pi, p.alpha, tau));
    for (int t = 0; t < options.max_outer_iterations; ++t) {
      const SweepStats st = sweeps(p.pi, p.alpha, tau);
      if (!st.converged) ++cap_hits;
      p = msro(tau, nullptr);
      const double b = bnd(p.pi, p.alpha, tau);
      out.trace.push_back(b);
      const double prev = out.trace[out.trace.size() - 2];
      if (std::abs(b - prev) <= options.bound_rel_tolerance * (1.0 + std::abs(prev))) {
        out.converged = true;
        break;
      }
    }
    out.iterations = static_cast<int>(out.trace.size()) - 1;
    out.bound = out.trace.back();
    out.pi = std::move(p.pi);
    out.alpha = std::move(p.alpha);
    out.tau = std::move(tau);
    if (cap_hits > 0) {
      out.warnings.push_back("fixed-point sweep cap reached in " + std::to_string(cap_hits) +
                             " outer iterations");
    }
    return out;
  };

  std::vector<Eigen::MatrixXd> inits;
  if (init_tau) {
    if (init_tau->rows() != n || init_tau->cols() != q) {
      throw ValidationError("fit_sbm: init tau shape mismatch");
    }
    Eigen::MatrixXd tau = *init_tau;
    floor_rows(tau);
    inits.push_back(std::move(tau));
  } else if (init_labels) {
    inits.push_back(floored_one_hot(*init_labels, q));
  } else {
    const Rng root(options.seed);
    std::vector<int> base;
    if (options.init_method != InitMethod::random) {
      base = init_clustering(v.mx, q, options.init_method, root.split(11).seed());
      inits.push_back(floored_one_hot(base, q));
    }
    for (int r = static_cast<int>(inits.size()); r < options.n_random_restarts; ++r) {
      Rng rr = root.split(100 + static_cast<std::uint64_t>(r));
      std::vector<int> z;
      if (options.init_method == InitMethod::random) {
        z.resize(static_cast<std::size_t>(n));
        for (auto& l : z) l = static_cast<int>(rr.uniform_below(q));
      } else {
        z = perturb_labels(base, q, rr);
      }
      inits.push_back(floored_one_hot(z, q));
    }
  }

  std::vector<SbmRun> runs(inits.size());
  parallel_for(static_cast<int>(inits.size()), options.jobs,
               [&](int r) { runs[static_cast<std::size_t>(r)] =
                                run_one(inits[static_cast<std::size_t>(r)]); });
  std::size_t best = 0;
  for (std::size_t r = 1; r < runs.size(); ++r) {
    if (runs[r].bound > runs[best].bound) best = r;
  }
  SbmRun& win = runs[best];

  SbmFit res;
  res.q = q;
  res.pi = std::move(win.pi);
  res.alpha = std::move(win.alpha);
  res.tau = std::move(win.tau);
  res.bound = win.bound;
  res.bound_trace = std::move(win.trace);
  res.map_z = map_labels(res.tau);
  res.n_iterations = win.iterations;
  res.converged = win.converged;
  std::set<std::string> uniq(win.warnings.begin(), win.warnings.end());
  res.warnings.assign(uniq.begin(), uniq.end());
  return res;
}

}  // namespace mlvsbm
