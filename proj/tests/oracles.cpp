#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace oracle {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double phi_log(double x, double a) {
  if (x == 1.0) return a > 0.0 ? std::log(a) : kNegInf;
  return a < 1.0 ? std::log(1.0 - a) : kNegInf;
}

}  // namespace

double complete_ll(const mlvsbm::MultilevelNetwork& net, const mlvsbm::ModelParams& p,
                   const mlvsbm::Assignments& z) {
  const int ni = net.n_ind(), no = net.n_org();
  double total = 0.0;

  for (int j = 0; j < no; ++j) {
    const double pi = p.pi_org[z.z_org[(std::size_t)j]];
    if (pi <= 0.0) return kNegInf;
    total += std::log(pi);
  }
  for (int i = 0; i < ni; ++i) {
    for (int j = 0; j < no; ++j) {
      if (net.affiliation(i, j) != 1.0) continue;
      const double g = p.gamma(z.z_ind[(std::size_t)i], z.z_org[(std::size_t)j]);
      if (g <= 0.0) return kNegInf;
      total += std::log(g);
    }
  }
  double ind_sum = 0.0;
  for (int i = 0; i < ni; ++i) {
    for (int i2 = 0; i2 < ni; ++i2) {
      if (i == i2 || net.mask_ind(i, i2) != 1.0) continue;
      const double t = phi_log(net.x_ind(i, i2),
                               p.alpha_ind(z.z_ind[(std::size_t)i], z.z_ind[(std::size_t)i2]));
      if (t == kNegInf) return kNegInf;
      ind_sum += t;
    }
  }
  total += net.directed_ind ? ind_sum : 0.5 * ind_sum;
  double org_sum = 0.0;
  for (int j = 0; j < no; ++j) {
    for (int j2 = 0; j2 < no; ++j2) {
      if (j == j2 || net.mask_org(j, j2) != 1.0) continue;
      const double t = phi_log(net.x_org(j, j2),
                               p.alpha_org(z.z_org[(std::size_t)j], z.z_org[(std::size_t)j2]));
      if (t == kNegInf) return kNegInf;
      org_sum += t;
    }
  }
  total += net.directed_org ? org_sum : 0.5 * org_sum;
  return total;
}

double exact_ll(const mlvsbm::MultilevelNetwork& net, const mlvsbm::ModelParams& p) {
  std::vector<double> terms;
  mlvsbm::Assignments z;
  z.z_ind.assign((std::size_t)net.n_ind(), 0);
  z.z_org.assign((std::size_t)net.n_org(), 0);

  // recursive enumeration, organizations outermost
  std::function<void(std::size_t)> rec_ind = [&](std::size_t i) {
    if (i == z.z_ind.size()) {
      terms.push_back(complete_ll(net, p, z));
      return;
    }
    for (int k = 0; k < p.q_ind; ++k) {
      z.z_ind[i] = k;
      rec_ind(i + 1);
    }
  };
  std::function<void(std::size_t)> rec_org = [&](std::size_t j) {
    if (j == z.z_org.size()) {
      rec_ind(0);
      return;
    }
    for (int l = 0; l < p.q_org; ++l) {
      z.z_org[j] = l;
      rec_org(j + 1);
    }
  };
  rec_org(0);

  const double m = *std::max_element(terms.begin(), terms.end());
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (double t : terms) {
    if (t != kNegInf) s += std::exp(t - m);
  }
  return m + std::log(s);
}

double bound_fd_sup(const mlvsbm::MultilevelNetwork& net, const mlvsbm::ModelParams& p,
                    const mlvsbm::VariationalState& s, double step, double margin) {
  double sup = 0.0;
  auto probe = [&](const mlvsbm::ModelParams& plus, const mlvsbm::ModelParams& minus) {
    const double fd = (mlvsbm::variational_bound(net, plus, s) -
                       mlvsbm::variational_bound(net, minus, s)) /
                      (2.0 * step);
    sup = std::max(sup, std::abs(fd));
  };

  auto alpha_dirs = [&](bool ind_level, const Eigen::MatrixXd& alpha, bool directed) {
    for (int k = 0; k < alpha.rows(); ++k) {
      for (int l = directed ? 0 : k; l < alpha.cols(); ++l) {
        const double a = alpha(k, l);
        if (a < margin || a > 1.0 - margin) continue;  // clamped boundary
        mlvsbm::ModelParams plus = p, minus = p;
        Eigen::MatrixXd& ap = ind_level ? plus.alpha_ind : plus.alpha_org;
        Eigen::MatrixXd& am = ind_level ? minus.alpha_ind : minus.alpha_org;
        ap(k, l) += step;
        am(k, l) -= step;
        if (!directed && k != l) {  // stay inside the symmetric family
          ap(l, k) += step;
          am(l, k) -= step;
        }
        probe(plus, minus);
      }
    }
  };
  alpha_dirs(true, p.alpha_ind, p.directed_ind);
  alpha_dirs(false, p.alpha_org, p.directed_org);

  for (int a = 0; a < p.q_org; ++a) {
    for (int b = a + 1; b < p.q_org; ++b) {
      if (p.pi_org[a] < margin || p.pi_org[b] < margin) continue;
      mlvsbm::ModelParams plus = p, minus = p;
      plus.pi_org[a] += step;
      plus.pi_org[b] -= step;
      minus.pi_org[a] -= step;
      minus.pi_org[b] += step;
      probe(plus, minus);
    }
  }
  for (int l = 0; l < p.q_org; ++l) {
    for (int a = 0; a < p.q_ind; ++a) {
      for (int b = a + 1; b < p.q_ind; ++b) {
        if (p.gamma(a, l) < margin || p.gamma(b, l) < margin) continue;
        mlvsbm::ModelParams plus = p, minus = p;
        plus.gamma(a, l) += step;
        plus.gamma(b, l) -= step;
        minus.gamma(a, l) -= step;
        minus.gamma(b, l) += step;
        probe(plus, minus);
      }
    }
  }
  return sup;
}

double ari_pairs(const std::vector<int>& a, const std::vector<int>& b) {
  const std::size_t n = a.size();
  double ss = 0.0, sd = 0.0, ds = 0.0, dd = 0.0;  // same/different in each clustering
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool sa = a[i] == a[j], sb = b[i] == b[j];
      if (sa && sb) ss += 1.0;
      else if (sa) sd += 1.0;
      else if (sb) ds += 1.0;
      else dd += 1.0;
    }
  }
  const double total = ss + sd + ds + dd;
  const double expected = (ss + sd) * (ss + ds) / total;
  const double max_index = 0.5 * ((ss + sd) + (ss + ds));
  if (max_index == expected) return 1.0;
  return (ss - expected) / (max_index - expected);
}

double auc_pairs(const std::vector<double>& scores, const std::vector<int>& labels) {
  double wins = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      pairs += 1.0;
      if (scores[i] > scores[j]) wins += 1.0;
      else if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  return wins / pairs;
}

}  // namespace oracle
