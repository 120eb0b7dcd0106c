#include "mlvsbm/json_io.hpp"

#include <fstream>

namespace mlvsbm {

namespace {

Json matrix_to_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (int i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const Json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) throw ValidationError(what + ": expected a nested array");
  const int rows = static_cast<int>(j.size());
  const int cols = static_cast<int>(j.at(0).size());
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    const auto& row = j.at(static_cast<std::size_t>(i));
    if (static_cast<int>(row.size()) != cols) {
      throw ValidationError(what + ": ragged rows");
    }
    for (int c = 0; c < cols; ++c) m(i, c) = row.at(static_cast<std::size_t>(c)).get<double>();
  }
  return m;
}

Json vector_to_json(const Eigen::VectorXd& v) {
  Json out = Json::array();
  for (int i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Eigen::VectorXd vector_from_json(const Json& j) {
  Eigen::VectorXd v(static_cast<int>(j.size()));
  for (int i = 0; i < v.size(); ++i) v[i] = j.at(static_cast<std::size_t>(i)).get<double>();
  return v;
}

Json edges_to_json(const Eigen::MatrixXd& x, bool directed) {
  Json out = Json::array();
  const int n = static_cast<int>(x.rows());
  for (int i = 0; i < n; ++i) {
    for (int j = directed ? 0 : i + 1; j < n; ++j) {
      if (i != j && x(i, j) == 1.0) out.push_back(Json::array({i, j}));
    }
  }
  return out;
}

Json masked_pairs_to_json(const Eigen::MatrixXd& mask, bool directed) {
  Json out = Json::array();
  const int n = static_cast<int>(mask.rows());
  for (int i = 0; i < n; ++i) {
    for (int j = directed ? 0 : i + 1; j < n; ++j) {
      if (i != j && mask(i, j) == 0.0) out.push_back(Json::array({i, j}));
    }
  }
  return out;
}

std::vector<int> int_vector_from_json(const Json& j) {
  std::vector<int> v;
  v.reserve(j.size());
  for (const auto& e : j) v.push_back(e.get<int>());
  return v;
}

}  // namespace

Json network_to_json(const MultilevelNetwork& net) {
  Json j;
  j["n_ind"] = net.n_ind();
  j["n_org"] = net.n_org();
  j["directed_ind"] = net.directed_ind;
  j["directed_org"] = net.directed_org;
  j["edges_ind"] = edges_to_json(net.x_ind, net.directed_ind);
  j["edges_org"] = edges_to_json(net.x_org, net.directed_org);
  Json aff = Json::array();
  for (int i : net.org_of()) aff.push_back(i);
  j["affiliation"] = std::move(aff);
  Json mi = masked_pairs_to_json(net.mask_ind, net.directed_ind);
  if (!mi.empty()) j["mask_ind"] = std::move(mi);
  Json mo = masked_pairs_to_json(net.mask_org, net.directed_org);
  if (!mo.empty()) j["mask_org"] = std::move(mo);
  return j;
}

MultilevelNetwork network_from_json(const Json& j) {
  const int n_ind = j.at("n_ind").get<int>();
  const int n_org = j.at("n_org").get<int>();
  const bool dir_i = j.at("directed_ind").get<bool>();
  const bool dir_o = j.at("directed_org").get<bool>();
  if (n_ind < 1 || n_org < 1) throw ValidationError("network json: sizes must be >= 1");

  auto build = [](const Json& edges, int n, bool directed, const std::string& what) {
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, n);
    for (const auto& e : edges) {
      const int a = e.at(0).get<int>(), b = e.at(1).get<int>();
      if (a < 0 || b < 0 || a >= n || b >= n) {
        throw ValidationError(what + ": edge endpoint out of range");
      }
      if (a == b) throw ValidationError(what + ": self-loop");
      x(a, b) = 1.0;
      if (!directed) x(b, a) = 1.0;
    }
    return x;
  };
  auto x_ind = build(j.at("edges_ind"), n_ind, dir_i, "edges_ind");
  auto x_org = build(j.at("edges_org"), n_org, dir_o, "edges_org");

  const auto& aff_idx = j.at("affiliation");
  if (static_cast<int>(aff_idx.size()) != n_ind) {
    throw ValidationError("network json: affiliation length must equal n_ind");
  }
  Eigen::MatrixXd aff = Eigen::MatrixXd::Zero(n_ind, n_org);
  for (int i = 0; i < n_ind; ++i) {
    const int o = aff_idx.at(static_cast<std::size_t>(i)).get<int>();
    if (o < 0 || o >= n_org) throw ValidationError("network json: affiliation index out of range");
    aff(i, o) = 1.0;
  }

  auto net = make_network(std::move(x_ind), std::move(x_org), std::move(aff), dir_i, dir_o);
  auto apply_masked_pairs = [](Eigen::MatrixXd& mask, const Json& pairs, bool directed, int n) {
    for (const auto& e : pairs) {
      const int a = e.at(0).get<int>(), b = e.at(1).get<int>();
      if (a < 0 || b < 0 || a >= n || b >= n || a == b) {
        throw ValidationError("network json: bad masked pair");
      }
      mask(a, b) = 0.0;
      if (!directed) mask(b, a) = 0.0;
    }
  };
  if (j.contains("mask_ind")) apply_masked_pairs(net.mask_ind, j.at("mask_ind"), dir_i, n_ind);
  if (j.contains("mask_org")) apply_masked_pairs(net.mask_org, j.at("mask_org"), dir_o, n_org);
  require_valid(net);
  return net;
}

Json params_to_json(const ModelParams& p) {
  Json j;
  j["q_ind"] = p.q_ind;
  j["q_org"] = p.q_org;
  j["pi_org"] = vector_to_json(p.pi_org);
  j["gamma"] = matrix_to_json(p.gamma);
  j["alpha_ind"] = matrix_to_json(p.alpha_ind);
  j["alpha_org"] = matrix_to_json(p.alpha_org);
  j["directed_ind"] = p.directed_ind;
  j["directed_org"] = p.directed_org;
  return j;
}

ModelParams params_from_json(const Json& j) {
  ModelParams p;
  p.q_ind = j.at("q_ind").get<int>();
  p.q_org = j.at("q_org").get<int>();
  p.pi_org = vector_from_json(j.at("pi_org"));
  p.gamma = matrix_from_json(j.at("gamma"), "gamma");
  p.alpha_ind = matrix_from_json(j.at("alpha_ind"), "alpha_ind");
  p.alpha_org = matrix_from_json(j.at("alpha_org"), "alpha_org");
  p.directed_ind = j.at("directed_ind").get<bool>();
  p.directed_org = j.at("directed_org").get<bool>();
  require_valid(p);
  return p;
}

Json assignments_to_json(const Assignments& z) {
  Json j;
  j["z_ind"] = z.z_ind;
  j["z_org"] = z.z_org;
  return j;
}

Assignments assignments_from_json(const Json& j) {
  Assignments z;
  z.z_ind = int_vector_from_json(j.at("z_ind"));
  z.z_org = int_vector_from_json(j.at("z_org"));
  return z;
}

namespace {

Json options_to_json(const FitOptions& o) {
  Json j;
  j["max_outer_iterations"] = o.max_outer_iterations;
  j["bound_rel_tolerance"] = o.bound_rel_tolerance;
  j["max_fixed_point_sweeps"] = o.max_fixed_point_sweeps;
  j["fixed_point_tolerance"] = o.fixed_point_tolerance;
  j["n_random_restarts"] = o.n_random_restarts;
  j["init_method"] = to_string(o.init_method);
  j["seed"] = o.seed;
  j["damping"] = o.damping;
  j["constrained_independent_gamma"] = o.constrained_independent_gamma;
  return j;
}

}  // namespace

Json fit_to_json(const FitResult& f, const FitOptions& options) {
  Json j;
  j["params"] = params_to_json(f.params);
  j["tau_ind"] = matrix_to_json(f.state.tau_ind);
  j["tau_org"] = matrix_to_json(f.state.tau_org);
  j["map_z_ind"] = f.map_assignments.z_ind;
  j["map_z_org"] = f.map_assignments.z_org;
  j["bound"] = f.bound;
  j["bound_trace"] = f.bound_trace;
  j["icl"] = f.icl;
  j["converged"] = f.converged;
  j["n_iterations"] = f.n_iterations;
  j["warnings"] = f.warnings;
  j["options_echo"] = options_to_json(options);
  return j;
}

FitResult fit_from_json(const Json& j) {
  FitResult f;
  f.params = params_from_json(j.at("params"));
  f.state.tau_ind = matrix_from_json(j.at("tau_ind"), "tau_ind");
  f.state.tau_org = matrix_from_json(j.at("tau_org"), "tau_org");
  f.map_assignments.z_ind = int_vector_from_json(j.at("map_z_ind"));
  f.map_assignments.z_org = int_vector_from_json(j.at("map_z_org"));
  f.bound = j.at("bound").get<double>();
  f.bound_trace = j.at("bound_trace").get<std::vector<double>>();
  f.icl = j.at("icl").is_null() ? std::numeric_limits<double>::quiet_NaN()
                                : j.at("icl").get<double>();
  f.converged = j.at("converged").get<bool>();
  f.n_iterations = j.at("n_iterations").get<int>();
  if (j.contains("warnings")) f.warnings = j.at("warnings").get<std::vector<std::string>>();
  return f;
}

Json selection_to_json(const SelectionResult& sel, const FitOptions& options) {
  Json j;
  j["best_q"] = Json::array({sel.best_q.first, sel.best_q.second});
  j["verdict"] = to_string(sel.verdict);
  j["icl_best"] = sel.best_fit.icl;
  j["independent_q"] = Json::array({sel.independent_q.first, sel.independent_q.second});
  j["icl_independent"] = sel.icl_independent;
  j["icl_sbm_ind"] = sel.icl_sbm_ind;
  j["icl_sbm_org"] = sel.icl_sbm_org;
  Json explored = Json::array();
  for (const auto& [pair, icl] : sel.explored) {
    Json e;
    e["q_ind"] = pair.first;
    e["q_org"] = pair.second;
    e["icl"] = icl;
    explored.push_back(std::move(e));
  }
  j["explored"] = std::move(explored);
  Json trace = Json::array();
  for (const auto& t : sel.search_trace) {
    Json e;
    e["move"] = t.move;
    e["q_ind"] = t.q_ind;
    e["q_org"] = t.q_org;
    e["icl"] = t.icl;
    trace.push_back(std::move(e));
  }
  j["search_trace"] = std::move(trace);
  j["warnings"] = sel.warnings;
  j["best_fit"] = fit_to_json(sel.best_fit, options);
  return j;
}

Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  Json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }
  return j;
}

void save_json_file(const Json& j, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path);
  out << j.dump(2) << "\n";
}

}  // namespace mlvsbm
