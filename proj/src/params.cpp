#include "mlvsbm/params.hpp"

#include <cmath>
#include <limits>

#include "mlvsbm/network.hpp"

namespace mlvsbm {

namespace {
constexpr double kSumTol = 1e-10;
}

std::vector<std::string> check_params(const ModelParams& p) {
  std::vector<std::string> out;
  if (p.q_ind < 1) out.push_back("q_ind must be >= 1");
  if (p.q_org < 1) out.push_back("q_org must be >= 1");
  if (p.pi_org.size() != p.q_org) {
    out.push_back("pi_org length must equal q_org");
  } else {
    if (std::abs(p.pi_org.sum() - 1.0) > kSumTol) out.push_back("pi_org must sum to 1");
    if ((p.pi_org.array() < 0.0).any()) out.push_back("pi_org entries must be >= 0");
  }
  if (p.gamma.rows() != p.q_ind || p.gamma.cols() != p.q_org) {
    out.push_back("gamma must be q_ind x q_org");
  } else {
    for (int l = 0; l < p.q_org; ++l) {
      if (std::abs(p.gamma.col(l).sum() - 1.0) > kSumTol) {
        out.push_back("gamma column " + std::to_string(l) + " must sum to 1");
      }
    }
    if ((p.gamma.array() < 0.0).any()) out.push_back("gamma entries must be >= 0");
  }
  auto check_alpha = [&out](const Eigen::MatrixXd& a, int q, bool directed,
                            const std::string& name) {
    if (a.rows() != q || a.cols() != q) {
      out.push_back(name + " must be " + std::to_string(q) + "x" + std::to_string(q));
      return;
    }
    if ((a.array() < 0.0).any() || (a.array() > 1.0).any()) {
      out.push_back(name + " entries must be in [0,1]");
    }
    if (!directed && !a.isApprox(a.transpose(), 0.0)) {
      out.push_back(name + " must be symmetric on an undirected level");
    }
  };
  check_alpha(p.alpha_ind, p.q_ind, p.directed_ind, "alpha_ind");
  check_alpha(p.alpha_org, p.q_org, p.directed_org, "alpha_org");
  return out;
}

void require_valid(const ModelParams& params) {
  const auto v = check_params(params);
  if (v.empty()) return;
  std::string msg = "invalid parameters:";
  for (const auto& s : v) msg += "\n  " + s;
  throw ValidationError(msg);
}

Topology topology_from_string(const std::string& s) {
  if (s == "assortative") return Topology::assortative;
  if (s == "disassortative") return Topology::disassortative;
  if (s == "core-periphery") return Topology::core_periphery;
  throw ValidationError("unknown topology '" + s + "'");
}

std::string to_string(Topology t) {
  switch (t) {
    case Topology::assortative: return "assortative";
    case Topology::disassortative: return "disassortative";
    case Topology::core_periphery: return "core-periphery";
  }
  return "?";
}

Eigen::MatrixXd topology_alpha(Topology kind, double d, double eps, int q) {
  if (!(d > 0.0)) throw ValidationError("topology_alpha: d must be > 0");
  if (!(eps >= 1.0)) throw ValidationError("topology_alpha: eps must be >= 1");
  if (q < 1) throw ValidationError("topology_alpha: q must be >= 1");
  if (d * eps > 1.0) throw ValidationError("topology_alpha: d*eps exceeds 1");
  Eigen::MatrixXd pattern(q, q);
  for (int i = 0; i < q; ++i) {
    for (int j = 0; j < q; ++j) {
      switch (kind) {
        case Topology::assortative: pattern(i, j) = i == j ? eps : 1.0; break;
        case Topology::disassortative: pattern(i, j) = i == j ? 1.0 : eps; break;
        case Topology::core_periphery: pattern(i, j) = (i + j < q - 1) ? eps : 1.0; break;
      }
    }
  }
  return d * pattern;
}

Eigen::MatrixXd gamma_from_delta(double delta, int q) {
  if (!(delta >= 0.0 && delta <= 1.0)) {
    throw ValidationError("gamma_from_delta: delta must be in [0,1]");
  }
  if (q < 2) throw ValidationError("gamma_from_delta: q must be >= 2");
  const double off = (1.0 - delta) / static_cast<double>(q - 1);
  Eigen::MatrixXd g = Eigen::MatrixXd::Constant(q, q, off);
  g.diagonal().setConstant(delta);
  return g;
}

IdentifiabilityReport identifiability_diagnostic(const ModelParams& p) {
  require_valid(p);
  auto min_gap = [](const Eigen::VectorXd& v) {
    double gap = std::numeric_limits<double>::infinity();
    for (int a = 0; a < v.size(); ++a) {
      for (int b = a + 1; b < v.size(); ++b) {
        gap = std::min(gap, std::abs(v[a] - v[b]));
      }
    }
    return v.size() < 2 ? std::numeric_limits<double>::infinity() : gap;
  };
  IdentifiabilityReport r;
  r.min_gap_ind = min_gap(p.alpha_ind * p.gamma * p.pi_org);
  r.min_gap_org = min_gap(p.alpha_org * p.pi_org);
  r.ok = r.min_gap_ind > 0.0 && r.min_gap_org > 0.0;
  return r;
}

}  // namespace mlvsbm
