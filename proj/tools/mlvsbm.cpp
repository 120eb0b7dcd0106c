#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mlvsbm/generator.hpp"
#include "mlvsbm/json_io.hpp"
#include "mlvsbm/metrics.hpp"
#include "mlvsbm/model_select.hpp"
#include "mlvsbm/predict.hpp"
#include "mlvsbm/vem.hpp"

namespace fs = std::filesystem;
using mlvsbm::Json;

namespace {

constexpr const char* kVersion = "0.1.0";

struct Manifest {
  std::string subcommand;
  Json config = Json::object();
  std::vector<std::string> outputs;
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

  void write(const fs::path& dir) const {
    Json j;
    j["tool"] = "mlvsbm";
    j["version"] = kVersion;
    j["subcommand"] = subcommand;
    j["config"] = config;
    j["outputs"] = outputs;
    j["wall_time_s"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    mlvsbm::save_json_file(j, (dir / "run-manifest.json").string());
  }
};

fs::path prepare_output_dir(const std::string& out) {
  fs::path dir(out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw mlvsbm::ValidationError("cannot create output directory " + out);
  }
  return dir;
}

std::vector<mlvsbm::PredModel> parse_models(const std::vector<std::string>& names) {
  std::vector<mlvsbm::PredModel> models;
  for (const auto& m : names) {
    if (m == "mlvsbm") {
      models.push_back(mlvsbm::PredModel::mlvsbm);
    } else if (m == "sbm") {
      models.push_back(mlvsbm::PredModel::sbm);
    } else {
      throw mlvsbm::ValidationError("unknown model '" + m + "'");
    }
  }
  return models;
}

// ---- simulate ----------------------------------------------------------

struct SimulateArgs {
  std::string preset;
  std::string params_path;
  std::string output;
  int n_ind = 60;
  int n_org = 20;
  std::string topology = "assortative";
  double d = 0.1;
  double eps = 5.0;
  double delta = 0.8;
  int q = 3;
  std::string affiliation = "power-law";
  double exponent = 2.0;
  bool directed_ind = false;
  bool directed_org = false;
  std::uint64_t seed = mlvsbm::kDefaultSeed;
};

int run_simulate(const SimulateArgs& a) {
  Manifest man;
  man.subcommand = "simulate";

  mlvsbm::ModelParams params;
  if (!a.params_path.empty()) {
    params = mlvsbm::params_from_json(mlvsbm::load_json_file(a.params_path));
  } else {
    std::string topology = a.topology;
    if (!a.preset.empty()) {
      if (a.preset == "s4-assortative") topology = "assortative";
      else if (a.preset == "s4-disassortative") topology = "disassortative";
      else if (a.preset == "s4-coreperiphery") topology = "core-periphery";
      else throw mlvsbm::ValidationError("unknown preset '" + a.preset + "'");
    }
    params.q_ind = a.q;
    params.q_org = a.q;
    params.pi_org = Eigen::VectorXd::Constant(a.q, 1.0 / a.q);
    params.gamma = mlvsbm::gamma_from_delta(a.delta, a.q);
    params.alpha_ind =
        mlvsbm::topology_alpha(mlvsbm::topology_from_string(topology), a.d, a.eps, a.q);
    params.alpha_org =
        mlvsbm::topology_alpha(mlvsbm::Topology::assortative, 0.1, 5.0, a.q);
    params.directed_ind = a.directed_ind;
    params.directed_org = a.directed_org;
  }

  mlvsbm::Rng root(a.seed);
  Eigen::MatrixXd aff;
  if (a.affiliation == "power-law") {
    aff = mlvsbm::sample_affiliation(a.n_ind, a.n_org, mlvsbm::SizeLaw::power_law,
                                     a.exponent, root.split(1).seed());
  } else if (a.affiliation == "uniform") {
    aff = mlvsbm::sample_affiliation(a.n_ind, a.n_org, mlvsbm::SizeLaw::uniform, 2.0,
                                     root.split(1).seed());
  } else {
    throw mlvsbm::ValidationError("unknown affiliation law '" + a.affiliation + "'");
  }
  auto [net, truth] = mlvsbm::sample_network(params, aff, root.split(2).seed());

  const fs::path dir = prepare_output_dir(a.output);
  mlvsbm::save_json_file(mlvsbm::network_to_json(net), (dir / "network.json").string());
  mlvsbm::save_json_file(mlvsbm::assignments_to_json(truth), (dir / "truth.json").string());
  mlvsbm::save_json_file(mlvsbm::params_to_json(params), (dir / "params.json").string());
  man.outputs = {"network.json", "truth.json", "params.json"};

  man.config = {{"preset", a.preset},       {"params", a.params_path},
                {"n_ind", a.n_ind},         {"n_org", a.n_org},
                {"topology", a.topology},   {"d", a.d},
                {"eps", a.eps},             {"delta", a.delta},
                {"q", a.q},                 {"affiliation", a.affiliation},
                {"exponent", a.exponent},   {"directed_ind", a.directed_ind},
                {"directed_org", a.directed_org}, {"seed", a.seed}};
  man.write(dir);

  const auto stats = mlvsbm::network_stats(net);
  std::printf("simulated network: n_ind=%d n_org=%d density_ind=%.4f density_org=%.4f\n",
              net.n_ind(), net.n_org(), stats.density_ind, stats.density_org);
  std::printf("wrote %s\n", (dir / "network.json").string().c_str());
  return 0;
}

// ---- fit ---------------------------------------------------------------

struct FitArgs {
  std::string input;
  std::string output;
  int q_ind = 0;
  int q_org = 0;
  double tolerance = 1e-6;
  int max_iter = 1000;
  int restarts = 10;
  std::string init = "spectral";
  bool constrained_gamma = false;
  std::uint64_t seed = mlvsbm::kDefaultSeed;
  int jobs = 1;
};

mlvsbm::FitOptions fit_options_from(const FitArgs& a) {
  mlvsbm::FitOptions fo;
  fo.bound_rel_tolerance = a.tolerance;
  fo.max_outer_iterations = a.max_iter;
  fo.n_random_restarts = a.restarts;
  fo.init_method = mlvsbm::init_method_from_string(a.init);
  fo.constrained_independent_gamma = a.constrained_gamma;
  fo.seed = a.seed;
  fo.jobs = a.jobs;
  return fo;
}

int run_fit(const FitArgs& a) {
  Manifest man;
  man.subcommand = "fit";
  const auto net = mlvsbm::network_from_json(mlvsbm::load_json_file(a.input));
  const auto fo = fit_options_from(a);
  auto fit = mlvsbm::fit(net, a.q_ind, a.q_org, fo);
  fit.icl = mlvsbm::icl_mlvsbm(net, fit);

  const fs::path dir = prepare_output_dir(a.output);
  mlvsbm::save_json_file(mlvsbm::fit_to_json(fit, fo), (dir / "fit.json").string());
  man.outputs = {"fit.json"};
  man.config = {{"input", a.input},        {"q_ind", a.q_ind},
                {"q_org", a.q_org},        {"tolerance", a.tolerance},
                {"max_iter", a.max_iter},  {"restarts", a.restarts},
                {"init", a.init},          {"constrained_gamma", a.constrained_gamma},
                {"seed", a.seed},          {"jobs", a.jobs}};
  man.write(dir);

  std::printf("fit (q_ind=%d, q_org=%d): bound=%.6f icl=%.6f iterations=%d converged=%s\n",
              a.q_ind, a.q_org, fit.bound, fit.icl, fit.n_iterations,
              fit.converged ? "yes" : "no");
  return 0;
}

// ---- select ------------------------------------------------------------

struct SelectArgs {
  std::string input;
  std::string output;
  int q_max = 10;
  double tolerance = 1e-6;
  int max_iter = 1000;
  std::uint64_t seed = mlvsbm::kDefaultSeed;
  int jobs = 1;
  bool grid = false;
};

int run_select(const SelectArgs& a) {
  Manifest man;
  man.subcommand = "select";
  const auto net = mlvsbm::network_from_json(mlvsbm::load_json_file(a.input));
  mlvsbm::SelectOptions so;
  so.q_max = a.q_max;
  so.exhaustive = a.grid;
  so.fit.bound_rel_tolerance = a.tolerance;
  so.fit.max_outer_iterations = a.max_iter;
  so.fit.seed = a.seed;
  so.fit.jobs = a.jobs;
  const auto sel = mlvsbm::select(net, so);

  const fs::path dir = prepare_output_dir(a.output);
  mlvsbm::save_json_file(mlvsbm::selection_to_json(sel, so.fit),
                         (dir / "selection.json").string());
  man.outputs = {"selection.json"};
  man.config = {{"input", a.input},   {"q_max", a.q_max}, {"tolerance", a.tolerance},
                {"max_iter", a.max_iter}, {"seed", a.seed}, {"jobs", a.jobs},
                {"grid", a.grid}};
  man.write(dir);

  std::printf("selected q_ind=%d q_org=%d verdict=%s icl=%.6f icl_independent=%.6f\n",
              sel.best_q.first, sel.best_q.second, mlvsbm::to_string(sel.verdict).c_str(),
              sel.best_fit.icl, sel.icl_independent);
  return 0;
}

// ---- predict -----------------------------------------------------------

struct PredictArgs {
  std::string input;
  std::string fit_path;
  std::string output;
  std::string level = "ind";
  std::string targets = "masked";
  std::string format = "csv";
};

int run_predict(const PredictArgs& a) {
  Manifest man;
  man.subcommand = "predict";
  const auto net = mlvsbm::network_from_json(mlvsbm::load_json_file(a.input));
  const auto fit = mlvsbm::fit_from_json(mlvsbm::load_json_file(a.fit_path));
  const mlvsbm::Level level =
      a.level == "ind" ? mlvsbm::Level::ind
                       : (a.level == "org" ? mlvsbm::Level::org
                                           : throw mlvsbm::ValidationError("level must be ind|org"));
  const auto scores = mlvsbm::dyad_probabilities(net, fit, level,
                                                 mlvsbm::target_set_from_string(a.targets));

  const fs::path dir = prepare_output_dir(a.output);
  if (a.format == "csv") {
    std::ofstream out(dir / "scores.csv", std::ios::binary);
    if (!out) throw mlvsbm::ValidationError("cannot write scores.csv");
    out << "from,to,score\n";
    char buf[96];
    for (const auto& [i, j, s] : scores.scores) {
      std::snprintf(buf, sizeof buf, "%d,%d,%.10g\n", i, j, s);
      out << buf;
    }
    man.outputs = {"scores.csv"};
  } else if (a.format == "json") {
    Json j;
    j["level"] = a.level;
    j["targets"] = a.targets;
    Json arr = Json::array();
    for (const auto& [i, jj, s] : scores.scores) arr.push_back(Json::array({i, jj, s}));
    j["scores"] = std::move(arr);
    mlvsbm::save_json_file(j, (dir / "scores.json").string());
    man.outputs = {"scores.json"};
  } else {
    throw mlvsbm::ValidationError("format must be csv|json");
  }
  man.config = {{"input", a.input}, {"fit", a.fit_path}, {"level", a.level},
                {"targets", a.targets}, {"format", a.format}};
  man.write(dir);
  std::printf("scored %zu dyads on the %s level\n", scores.scores.size(), a.level.c_str());
  return 0;
}

// ---- evaluate ----------------------------------------------------------

struct EvaluateArgs {
  std::string truth_path;
  std::string pred_path;
  std::string output;
};

int run_evaluate(const EvaluateArgs& a) {
  const auto truth = mlvsbm::assignments_from_json(mlvsbm::load_json_file(a.truth_path));
  const auto j = mlvsbm::load_json_file(a.pred_path);
  mlvsbm::Assignments pred;
  if (j.contains("map_z_ind")) {
    pred.z_ind = j.at("map_z_ind").get<std::vector<int>>();
    pred.z_org = j.at("map_z_org").get<std::vector<int>>();
  } else if (j.contains("best_fit")) {
    pred.z_ind = j.at("best_fit").at("map_z_ind").get<std::vector<int>>();
    pred.z_org = j.at("best_fit").at("map_z_org").get<std::vector<int>>();
  } else {
    pred = mlvsbm::assignments_from_json(j);
  }
  const double ari_ind = mlvsbm::ari(truth.z_ind, pred.z_ind);
  const double ari_org = mlvsbm::ari(truth.z_org, pred.z_org);
  std::printf("ari_ind=%.6f\nari_org=%.6f\n", ari_ind, ari_org);
  if (!a.output.empty()) {
    Manifest man;
    man.subcommand = "evaluate";
    const fs::path dir = prepare_output_dir(a.output);
    Json out;
    out["ari_ind"] = ari_ind;
    out["ari_org"] = ari_org;
    mlvsbm::save_json_file(out, (dir / "metrics.json").string());
    man.outputs = {"metrics.json"};
    man.config = {{"truth", a.truth_path}, {"pred", a.pred_path}};
    man.write(dir);
  }
  return 0;
}

// ---- experiment --------------------------------------------------------

struct ExperimentArgs {
  std::string input;
  std::string output;
  std::vector<double> fractions;
  std::string mode = "dyads";
  std::vector<std::string> models = {"mlvsbm", "sbm"};
  int repeats = 30;
  std::string level = "ind";
  int q_ind = 3;
  int q_org = 3;
  int q_sbm = 3;
  bool use_select = false;
  int q_max = 10;
  double tolerance = 1e-6;
  int max_iter = 1000;
  std::uint64_t seed = mlvsbm::kDefaultSeed;
  int jobs = 1;
};

int run_experiment(const ExperimentArgs& a) {
  Manifest man;
  man.subcommand = "experiment";
  const auto net = mlvsbm::network_from_json(mlvsbm::load_json_file(a.input));
  mlvsbm::ExperimentOptions eo;
  eo.level = a.level == "org" ? mlvsbm::Level::org : mlvsbm::Level::ind;
  eo.q_ind = a.q_ind;
  eo.q_org = a.q_org;
  eo.q_sbm = a.q_sbm;
  eo.use_select = a.use_select;
  eo.q_max = a.q_max;
  eo.fit.bound_rel_tolerance = a.tolerance;
  eo.fit.max_outer_iterations = a.max_iter;
  eo.jobs = a.jobs;
  const auto mode = a.mode == "links" ? mlvsbm::MaskMode::links : mlvsbm::MaskMode::dyads;
  const auto result = mlvsbm::prediction_experiment(net, a.fractions, mode,
                                                    parse_models(a.models), a.repeats,
                                                    a.seed, eo);

  const fs::path dir = prepare_output_dir(a.output);
  mlvsbm::write_experiment_csv(result, (dir / "experiment_runs.csv").string(),
                               (dir / "experiment_summary.csv").string());
  man.outputs = {"experiment_runs.csv", "experiment_summary.csv"};
  Json fr = Json::array();
  for (double f : a.fractions) fr.push_back(f);
  man.config = {{"input", a.input},       {"fractions", fr},
                {"mode", a.mode},         {"models", a.models},
                {"repeats", a.repeats},   {"level", a.level},
                {"q_ind", a.q_ind},       {"q_org", a.q_org},
                {"q_sbm", a.q_sbm},       {"use_select", a.use_select},
                {"q_max", a.q_max},       {"tolerance", a.tolerance},
                {"max_iter", a.max_iter}, {"seed", a.seed},
                {"jobs", a.jobs}};
  man.write(dir);

  for (const auto& s : result.summary) {
    std::printf("fraction=%.3f model=%-7s mean_auc=%.4f stderr=%.4f (n=%d)\n", s.fraction,
                mlvsbm::to_string(s.model).c_str(), s.mean_auc, s.stderr_auc, s.n);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multilevel stochastic block models: simulate, fit, select, predict, evaluate"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "Sample a two-level network from the model");
  c_sim->add_option("--preset", sim.preset,
                    "s4-assortative | s4-disassortative | s4-coreperiphery");
  c_sim->add_option("--params", sim.params_path, "generative parameters JSON");
  c_sim->add_option("--n-ind", sim.n_ind, "number of individuals");
  c_sim->add_option("--n-org", sim.n_org, "number of organizations");
  c_sim->add_option("--topology", sim.topology, "individual-level pattern");
  c_sim->add_option("--d", sim.d, "individual-level density scale");
  c_sim->add_option("--eps", sim.eps, "individual-level contrast");
  c_sim->add_option("--delta", sim.delta, "between-level dependence strength");
  c_sim->add_option("--q", sim.q, "blocks per level");
  c_sim->add_option("--affiliation", sim.affiliation, "power-law | uniform");
  c_sim->add_option("--exponent", sim.exponent, "power-law exponent");
  c_sim->add_flag("--directed-ind", sim.directed_ind, "directed individual level");
  c_sim->add_flag("--directed-org", sim.directed_org, "directed organization level");
  c_sim->add_option("--seed", sim.seed, "random seed");
  c_sim->add_option("-o,--output", sim.output, "output directory")->required();

  FitArgs fit_args;
  auto* c_fit = app.add_subcommand("fit", "Variational EM at fixed block counts");
  c_fit->add_option("-i,--input", fit_args.input, "network bundle JSON")->required();
  c_fit->add_option("--q-ind", fit_args.q_ind, "individual blocks")->required();
  c_fit->add_option("--q-org", fit_args.q_org, "organization blocks")->required();
  c_fit->add_option("--tolerance", fit_args.tolerance, "relative bound tolerance");
  c_fit->add_option("--max-iter", fit_args.max_iter, "outer iteration cap");
  c_fit->add_option("--restarts", fit_args.restarts, "number of initializations");
  c_fit->add_option("--init", fit_args.init, "spectral | hierarchical | random");
  c_fit->add_flag("--constrained-gamma", fit_args.constrained_gamma,
                  "force equal mixing columns (independent levels)");
  c_fit->add_option("--seed", fit_args.seed, "random seed");
  c_fit->add_option("--jobs", fit_args.jobs, "parallel restarts");
  c_fit->add_option("-o,--output", fit_args.output, "output directory")->required();

  SelectArgs sel_args;
  auto* c_sel = app.add_subcommand("select", "Stepwise block-count and dependence selection");
  c_sel->add_option("-i,--input", sel_args.input, "network bundle JSON")->required();
  c_sel->add_option("--q-max", sel_args.q_max, "largest block count per level");
  c_sel->add_option("--tolerance", sel_args.tolerance, "relative bound tolerance");
  c_sel->add_option("--max-iter", sel_args.max_iter, "outer iteration cap");
  c_sel->add_option("--seed", sel_args.seed, "random seed");
  c_sel->add_option("--jobs", sel_args.jobs, "parallel neighbor fits");
  c_sel->add_flag("--grid", sel_args.grid, "exhaustive grid (tiny instances)")->group("");
  c_sel->add_option("-o,--output", sel_args.output, "output directory")->required();

  PredictArgs pred_args;
  auto* c_pred = app.add_subcommand("predict", "Dyad probabilities from a fit");
  c_pred->add_option("-i,--input", pred_args.input, "network bundle JSON")->required();
  c_pred->add_option("--fit", pred_args.fit_path, "fit JSON")->required();
  c_pred->add_option("--level", pred_args.level, "ind | org");
  c_pred->add_option("--targets", pred_args.targets, "masked | zeros | all");
  c_pred->add_option("--format", pred_args.format, "csv | json");
  c_pred->add_option("-o,--output", pred_args.output, "output directory")->required();

  EvaluateArgs eval_args;
  auto* c_eval = app.add_subcommand("evaluate", "Clustering agreement against a reference");
  c_eval->add_option("--truth", eval_args.truth_path, "reference assignments JSON")->required();
  c_eval->add_option("--pred", eval_args.pred_path, "fit or selection JSON")->required();
  c_eval->add_option("-o,--output", eval_args.output, "optional output directory");

  ExperimentArgs exp_args;
  auto* c_exp = app.add_subcommand("experiment", "Mask / refit / score prediction protocol");
  c_exp->add_option("-i,--input", exp_args.input, "network bundle JSON")->required();
  c_exp->add_option("--fractions", exp_args.fractions, "masking fractions")
      ->required()
      ->delimiter(',');
  c_exp->add_option("--mode", exp_args.mode, "dyads | links");
  c_exp->add_option("--models", exp_args.models, "mlvsbm,sbm")->delimiter(',');
  c_exp->add_option("--repeats", exp_args.repeats, "repeats per fraction");
  c_exp->add_option("--level", exp_args.level, "level to mask and score");
  c_exp->add_option("--q-ind", exp_args.q_ind, "blocks for the joint refit");
  c_exp->add_option("--q-org", exp_args.q_org, "blocks for the joint refit");
  c_exp->add_option("--q-sbm", exp_args.q_sbm, "blocks for the unilevel refit");
  c_exp->add_flag("--use-select", exp_args.use_select, "refit with the model search");
  c_exp->add_option("--q-max", exp_args.q_max, "search cap with --use-select");
  c_exp->add_option("--tolerance", exp_args.tolerance, "relative bound tolerance");
  c_exp->add_option("--max-iter", exp_args.max_iter, "outer iteration cap");
  c_exp->add_option("--seed", exp_args.seed, "random seed");
  c_exp->add_option("--jobs", exp_args.jobs, "parallel repeats");
  c_exp->add_option("-o,--output", exp_args.output, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help() << std::flush;
    return 64;
  }

  try {
    if (c_sim->parsed()) return run_simulate(sim);
    if (c_fit->parsed()) return run_fit(fit_args);
    if (c_sel->parsed()) return run_select(sel_args);
    if (c_pred->parsed()) return run_predict(pred_args);
    if (c_eval->parsed()) return run_evaluate(eval_args);
    if (c_exp->parsed()) return run_experiment(exp_args);
  } catch (const mlvsbm::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const mlvsbm::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
