#include "mlvsbm/network.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mlvsbm/rng.hpp"

namespace mlvsbm {

namespace {

bool is_binary(double v) { return v == 0.0 || v == 1.0; }

std::string ij(int i, int j) {
  return "(" + std::to_string(i) + "," + std::to_string(j) + ")";
}

void check_level(const std::string& name, const Eigen::MatrixXd& x,
                 const Eigen::MatrixXd& mask, bool directed,
                 std::vector<Violation>& out) {
  const int n = static_cast<int>(x.rows());
  if (x.cols() != n) {
    out.push_back({name, "shape", "adjacency must be square"});
    return;
  }
  if (mask.rows() != n || mask.cols() != n) {
    out.push_back({name + " mask", "shape", "mask shape differs from adjacency"});
    return;
  }
  for (int i = 0; i < n; ++i) {
    if (x(i, i) != 0.0) {
      out.push_back({name, ij(i, i), "nonzero diagonal"});
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      if (!is_binary(mask(i, j))) {
        out.push_back({name + " mask", ij(i, j), "entry not in {0,1}"});
      }
      // masked-out x entries may hold anything and are never read
      if (mask(i, j) == 1.0 && !is_binary(x(i, j))) {
        out.push_back({name, ij(i, j), "observed entry not in {0,1}"});
      }
    }
  }
  if (!directed) {
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if (mask(i, j) != mask(j, i)) {
          out.push_back({name + " mask", ij(i, j), "mask not symmetric on undirected level"});
        } else if (mask(i, j) == 1.0 && x(i, j) != x(j, i)) {
          out.push_back({name, ij(i, j), "adjacency not symmetric on undirected level"});
        }
      }
    }
  }
}

Eigen::MatrixXd full_mask(int n) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Ones(n, n);
  m.diagonal().setZero();
  return m;
}

double observed_density(const Eigen::MatrixXd& x, const Eigen::MatrixXd& mask) {
  double dyads = 0.0, edges = 0.0;
  const int n = static_cast<int>(x.rows());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j || mask(i, j) == 0.0) continue;
      dyads += 1.0;
      edges += x(i, j);
    }
  }
  return dyads > 0.0 ? edges / dyads : 0.0;
}

// Trims an optional trailing '\r' so CRLF files load too.
std::string chomp(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

std::vector<std::pair<int, int>> read_pair_csv(const std::string& path,
                                               const std::string& expected_header) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  std::string line;
  int lineno = 0;
  std::vector<std::pair<int, int>> rows;
  while (std::getline(in, line)) {
    ++lineno;
    line = chomp(line);
    if (lineno == 1) {
      if (line != expected_header) {
        throw ValidationError(path + ":1: expected header '" + expected_header +
                              "', got '" + line + "'");
      }
      continue;
    }
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw ValidationError(path + ":" + std::to_string(lineno) + ": malformed line '" + line + "'");
    }
    try {
      std::size_t used = 0;
      const int a = std::stoi(line.substr(0, comma), &used);
      if (used != comma) throw std::invalid_argument("");
      const std::string rest = line.substr(comma + 1);
      const int b = std::stoi(rest, &used);
      if (used != rest.size()) throw std::invalid_argument("");
      if (a < 0 || b < 0) throw std::invalid_argument("");
      rows.emplace_back(a, b);
    } catch (const std::exception&) {
      throw ValidationError(path + ":" + std::to_string(lineno) + ": malformed line '" + line + "'");
    }
  }
  return rows;
}

Eigen::MatrixXd edges_to_adjacency(const std::vector<std::pair<int, int>>& edges,
                                   int n, bool directed, const std::string& what) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, n);
  for (const auto& [a, b] : edges) {
    if (a >= n || b >= n) {
      throw ValidationError(what + ": edge " + ij(a, b) + " references node >= " +
                            std::to_string(n));
    }
    if (a == b) {
      throw ValidationError(what + ": self-loop at node " + std::to_string(a));
    }
    x(a, b) = 1.0;
    if (!directed) x(b, a) = 1.0;
  }
  return x;
}

}  // namespace

std::vector<int> MultilevelNetwork::org_of() const {
  std::vector<int> o(static_cast<std::size_t>(n_ind()), 0);
  for (int i = 0; i < n_ind(); ++i) {
    int best = 0;
    for (int j = 1; j < n_org(); ++j) {
      if (affiliation(i, j) > affiliation(i, best)) best = j;
    }
    o[static_cast<std::size_t>(i)] = best;
  }
  return o;
}

MultilevelNetwork make_network(Eigen::MatrixXd x_ind, Eigen::MatrixXd x_org,
                               Eigen::MatrixXd affiliation, bool directed_ind,
                               bool directed_org) {
  MultilevelNetwork net;
  net.mask_ind = full_mask(static_cast<int>(x_ind.rows()));
  net.mask_org = full_mask(static_cast<int>(x_org.rows()));
  net.x_ind = std::move(x_ind);
  net.x_org = std::move(x_org);
  net.affiliation = std::move(affiliation);
  net.directed_ind = directed_ind;
  net.directed_org = directed_org;
  return net;
}

std::vector<Violation> validate(const MultilevelNetwork& net) {
  std::vector<Violation> out;
  check_level("x_ind", net.x_ind, net.mask_ind, net.directed_ind, out);
  check_level("x_org", net.x_org, net.mask_org, net.directed_org, out);
  const int n_ind = static_cast<int>(net.x_ind.rows());
  const int n_org = static_cast<int>(net.x_org.rows());
  if (net.affiliation.rows() != n_ind || net.affiliation.cols() != n_org) {
    out.push_back({"affiliation", "shape", "must be n_ind x n_org"});
    return out;
  }
  for (int i = 0; i < n_ind; ++i) {
    double s = 0.0;
    bool binary = true;
    for (int j = 0; j < n_org; ++j) {
      if (!is_binary(net.affiliation(i, j))) binary = false;
      s += net.affiliation(i, j);
    }
    if (!binary) {
      out.push_back({"affiliation", "row " + std::to_string(i), "entry not in {0,1}"});
    }
    if (s != 1.0) {
      std::ostringstream os;
      os << "row sums to " << s << ", expected 1";
      out.push_back({"affiliation", "row " + std::to_string(i), os.str()});
    }
  }
  return out;
}

void require_valid(const MultilevelNetwork& net) {
  const auto v = validate(net);
  if (v.empty()) return;
  std::string msg = "invalid network:";
  for (const auto& x : v) msg += "\n  " + x.str();
  throw ValidationError(msg);
}

NetworkStats network_stats(const MultilevelNetwork& net) {
  NetworkStats s;
  s.density_ind = observed_density(net.x_ind, net.mask_ind);
  s.density_org = observed_density(net.x_org, net.mask_org);
  s.org_sizes = net.affiliation.colwise().sum().cast<int>();
  return s;
}

MaskResult apply_mask(const MultilevelNetwork& net, Level level, double fraction,
                      MaskMode mode, std::uint64_t seed) {
  if (mode == MaskMode::dyads && !(fraction >= 0.0 && fraction < 1.0)) {
    throw ValidationError("dyads mask fraction must be in [0,1)");
  }
  if (mode == MaskMode::links && !(fraction >= 0.0 && fraction <= 1.0)) {
    throw ValidationError("links mask fraction must be in [0,1]");
  }
  const Eigen::MatrixXd& x = net.x(level);
  const Eigen::MatrixXd& mask = net.mask(level);
  const bool directed = net.directed(level);
  const int n = static_cast<int>(x.rows());

  DyadList eligible;
  for (int i = 0; i < n; ++i) {
    for (int j = directed ? 0 : i + 1; j < n; ++j) {
      if (i == j || mask(i, j) == 0.0) continue;
      if (mode == MaskMode::links && x(i, j) != 1.0) continue;
      eligible.emplace_back(i, j);
    }
  }
  if (mode == MaskMode::links && eligible.empty()) {
    throw ValidationError("links mask: level has no existing edges");
  }
  const auto count = static_cast<std::size_t>(
      std::floor(fraction * static_cast<double>(eligible.size())));
  Rng rng(seed);
  const auto perm = rng.permutation(static_cast<int>(eligible.size()));
  DyadList chosen;
  chosen.reserve(count);
  for (std::size_t t = 0; t < count; ++t) {
    chosen.push_back(eligible[static_cast<std::size_t>(perm[t])]);
  }
  std::sort(chosen.begin(), chosen.end());
  return apply_mask(net, level, chosen, mode);
}

MaskResult apply_mask(const MultilevelNetwork& net, Level level,
                      const DyadList& dyads, MaskMode mode) {
  MaskResult r{net, {}};
  Eigen::MatrixXd& x = level == Level::ind ? r.net.x_ind : r.net.x_org;
  Eigen::MatrixXd& mask = level == Level::ind ? r.net.mask_ind : r.net.mask_org;
  const bool directed = net.directed(level);
  for (const auto& [i, j] : dyads) {
    if (i == j) throw ValidationError("cannot mask a diagonal entry");
    if (mode == MaskMode::dyads) {
      mask(i, j) = 0.0;
      x(i, j) = 0.0;  // hidden value; kept at zero so serialization is canonical
      if (!directed) {
        mask(j, i) = 0.0;
        x(j, i) = 0.0;
      }
    } else {
      if (x(i, j) != 1.0) throw ValidationError("links mask: dyad " + ij(i, j) + " has no edge");
      x(i, j) = 0.0;
      if (!directed) x(j, i) = 0.0;
    }
  }
  r.held_out = dyads;
  return r;
}

MultilevelNetwork load_network(const std::string& edges_ind_path,
                               const std::string& edges_org_path,
                               const std::string& affiliation_path,
                               const LoadOptions& options) {
  const auto aff_rows = read_pair_csv(affiliation_path, "individual,organization");
  int n_ind = options.n_ind;
  if (n_ind == 0) n_ind = static_cast<int>(aff_rows.size());
  int n_org = options.n_org;
  if (n_org == 0) {
    for (const auto& [i, j] : aff_rows) n_org = std::max(n_org, j + 1);
  }

  Eigen::MatrixXd aff = Eigen::MatrixXd::Zero(n_ind, n_org);
  std::vector<int> seen(static_cast<std::size_t>(n_ind), 0);
  for (const auto& [i, j] : aff_rows) {
    if (i >= n_ind) {
      throw ValidationError(affiliation_path + ": individual " + std::to_string(i) +
                            " >= n_ind = " + std::to_string(n_ind));
    }
    if (j >= n_org) {
      throw ValidationError(affiliation_path + ": organization " + std::to_string(j) +
                            " >= n_org = " + std::to_string(n_org));
    }
    aff(i, j) = 1.0;
    ++seen[static_cast<std::size_t>(i)];
  }
  for (int i = 0; i < n_ind; ++i) {
    if (seen[static_cast<std::size_t>(i)] != 1) {
      throw ValidationError(affiliation_path + ": individual " + std::to_string(i) +
                            " listed " + std::to_string(seen[static_cast<std::size_t>(i)]) +
                            " times, expected exactly once");
    }
  }

  auto x_ind = edges_to_adjacency(read_pair_csv(edges_ind_path, "from,to"), n_ind,
                                  options.directed_ind, edges_ind_path);
  auto x_org = edges_to_adjacency(read_pair_csv(edges_org_path, "from,to"), n_org,
                                  options.directed_org, edges_org_path);
  auto net = make_network(std::move(x_ind), std::move(x_org), std::move(aff),
                          options.directed_ind, options.directed_org);
  require_valid(net);
  return net;
}

void save_network(const MultilevelNetwork& net, const std::string& edges_ind_path,
                  const std::string& edges_org_path,
                  const std::string& affiliation_path) {
  auto write_edges = [](const std::string& path, const Eigen::MatrixXd& x, bool directed) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path);
    out << "from,to\n";
    const int n = static_cast<int>(x.rows());
    for (int i = 0; i < n; ++i) {
      for (int j = directed ? 0 : i + 1; j < n; ++j) {
        if (i != j && x(i, j) == 1.0) out << i << "," << j << "\n";
      }
    }
  };
  write_edges(edges_ind_path, net.x_ind, net.directed_ind);
  write_edges(edges_org_path, net.x_org, net.directed_org);

  std::ofstream out(affiliation_path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + affiliation_path);
  out << "individual,organization\n";
  const auto orgs = net.org_of();
  for (int i = 0; i < net.n_ind(); ++i) {
    out << i << "," << orgs[static_cast<std::size_t>(i)] << "\n";
  }
}

}  // namespace mlvsbm
