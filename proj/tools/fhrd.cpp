#include <CLI11.hpp>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <json.hpp>

#include "fhrd/csv.hpp"
#include "fhrd/estimation.hpp"
#include "fhrd/parallel.hpp"
#include "fhrd/prediction.hpp"
#include "fhrd/result_json.hpp"
#include "fhrd/simulation.hpp"
#include "fhrd/uncertainty.hpp"

namespace {

using nlohmann::json;

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;
constexpr std::uint64_t kDefaultSeed = 20170501;

struct FitFlags {
  fhrd::FitOptions options;
  void attach(CLI::App* cmd) {
    cmd->add_option("--max-iter", options.max_iterations, "alpha/gamma alternation cap");
    cmd->add_option("--tol", options.rel_tol, "alternation relative tolerance");
    cmd->add_option("--tau-floor-mult", options.tau_floor_multiplier,
                    "tau2 floor as a multiple of mean(v/n)");
    cmd->add_option("--alpha-bracket-lo", options.alpha_bracket_lo, "alpha fallback bracket low");
    cmd->add_option("--alpha-bracket-hi", options.alpha_bracket_hi, "alpha fallback bracket high");
    cmd->add_option("--root-tol", options.root_rel_tol, "root-finding relative tolerance");
  }
};

struct QuadFlags {
  fhrd::QuadratureOptions options;
  void attach(CLI::App* cmd) {
    cmd->add_option("--quad-rel-tol", options.rel_tol, "quadrature relative tolerance");
    cmd->add_option("--quad-trunc-mult", options.truncation_multiplier,
                    "quadrature truncation multiplier");
    cmd->add_option("--quad-max-subdiv", options.max_subdivisions,
                    "quadrature subdivision limit");
  }
};

json parse_json_text_or_file(const std::string& arg, const char* what) {
  std::string text = arg;
  if (!arg.empty() && arg[0] != '{' && arg[0] != '[') {
    std::ifstream in(arg);
    if (!in) throw fhrd::ValidationError(std::string(what) + ": cannot open '" + arg + "'");
    text.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
  json parsed = json::parse(text, nullptr, false);
  if (parsed.is_discarded()) {
    throw fhrd::ValidationError(std::string(what) + ": invalid JSON");
  }
  return parsed;
}

fhrd::ModelParams params_from_json(const json& j) {
  fhrd::ModelParams p;
  try {
    p.beta = j.at("beta").get<std::vector<double>>();
    p.tau2 = j.at("tau2").get<double>();
    p.alpha = j.at("alpha").get<double>();
    p.gamma = j.at("gamma").get<double>();
  } catch (const json::exception& e) {
    throw fhrd::ValidationError(std::string("--params: ") + e.what());
  }
  p.validate();
  return p;
}

fhrd::ExperimentSpec spec_from_json(const json& j) {
  fhrd::ExperimentSpec spec;
  try {
    if (j.contains("which")) spec.which = j.at("which").get<std::string>();
    if (j.contains("gamma")) spec.gamma = j.at("gamma").get<double>();
    if (j.contains("beta")) spec.beta = j.at("beta").get<std::vector<double>>();
    if (j.contains("n")) spec.n = j.at("n").get<int>();
    if (j.contains("replications")) spec.replications = j.at("replications").get<int>();
    if (j.contains("bootstrap")) spec.bootstrap = j.at("bootstrap").get<int>();
    if (j.contains("true_mse_replications")) {
      spec.true_mse_replications = j.at("true_mse_replications").get<int>();
    }
    if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("parallel")) spec.parallel = j.at("parallel").get<bool>();
    if (j.contains("desk")) spec.desk = j.at("desk").get<bool>();
    if (j.contains("cells")) {
      for (const auto& c : j.at("cells")) {
        fhrd::ExperimentCell cell;
        cell.m = c.at("m").get<int>();
        cell.alpha = c.at("alpha").get<double>();
        cell.tau2 = c.at("tau2").get<double>();
        spec.cells.push_back(cell);
      }
    }
  } catch (const json::exception& e) {
    throw fhrd::ValidationError(std::string("experiment spec: ") + e.what());
  }
  return spec;
}

void emit(const std::string& out_path, const json& doc) {
  fhrd::write_output(out_path, doc.dump(2) + "\n");
}

int run(int argc, char** argv) {
  CLI::App app{"Small-area estimation with dual shrinkage of means and variances"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "cap the OpenMP worker count (0 = default)");

  // ---- fit ----
  auto* cmd_fit = app.add_subcommand("fit", "estimate model parameters from a dataset CSV");
  std::string fit_dataset, fit_out;
  FitFlags fit_flags;
  cmd_fit->add_option("dataset", fit_dataset, "dataset CSV")->required();
  cmd_fit->add_option("--out", fit_out, "output JSON path (default stdout)");
  fit_flags.attach(cmd_fit);

  // ---- predict ----
  auto* cmd_predict = app.add_subcommand("predict", "per-area predictions");
  std::string pred_dataset, pred_out, pred_benchmark, pred_params;
  bool pred_bayes = false;
  FitFlags pred_fit_flags;
  QuadFlags pred_quad_flags;
  cmd_predict->add_option("dataset", pred_dataset, "dataset CSV")->required();
  cmd_predict->add_option("--out", pred_out, "output JSON path (default stdout)");
  cmd_predict->add_flag("--bayes", pred_bayes, "add quadrature-based exact predictions");
  cmd_predict->add_option("--benchmark", pred_benchmark, "weights CSV for benchmarking");
  cmd_predict->add_option("--params", pred_params,
                          "use these parameters (inline JSON or a path) instead of fitting");
  pred_fit_flags.attach(cmd_predict);
  pred_quad_flags.attach(cmd_predict);

  // ---- mse ----
  auto* cmd_mse = app.add_subcommand("mse", "bootstrap MSE estimation");
  std::string mse_dataset, mse_out, mse_benchmark;
  int mse_replicates = 1000;
  std::uint64_t mse_seed = kDefaultSeed;
  bool mse_serial = false;
  FitFlags mse_fit_flags;
  cmd_mse->add_option("dataset", mse_dataset, "dataset CSV")->required();
  cmd_mse->add_option("--out", mse_out, "output JSON path (default stdout)");
  cmd_mse->add_option("--replicates", mse_replicates, "bootstrap replicates")
      ->check(CLI::PositiveNumber);
  cmd_mse->add_option("--seed", mse_seed, "bootstrap seed (64-bit)");
  cmd_mse->add_option("--benchmark", mse_benchmark, "weights CSV for benchmarked MSE");
  cmd_mse->add_flag("--serial", mse_serial, "run the serial reference path");
  mse_fit_flags.attach(cmd_mse);

  // ---- simulate ----
  auto* cmd_sim = app.add_subcommand("simulate", "Monte Carlo study from a spec file");
  std::string sim_spec_path, sim_out, sim_out_csv, sim_out_table;
  bool sim_desk = false, sim_serial = false;
  std::optional<std::uint64_t> sim_seed;
  std::optional<int> sim_replications;
  cmd_sim->add_option("spec", sim_spec_path, "experiment spec JSON")->required();
  cmd_sim->add_option("--out", sim_out, "output JSON path (default stdout)");
  cmd_sim->add_option("--out-csv", sim_out_csv, "also write per-cell CSV here");
  cmd_sim->add_option("--out-table", sim_out_table, "also write a gnuplot-style table here");
  cmd_sim->add_flag("--desk", sim_desk, "reduced-budget preset");
  cmd_sim->add_flag("--serial", sim_serial, "run the serial reference path");
  cmd_sim->add_option("--seed", sim_seed, "override the spec seed");
  cmd_sim->add_option("--replicates", sim_replications, "override the spec replications");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }
  fhrd::set_workers(threads);

  if (cmd_fit->parsed()) {
    const fhrd::Dataset ds = fhrd::load_dataset_csv(fit_dataset);
    const fhrd::FitResult fit = fhrd::fit(ds.records, fit_flags.options);
    json doc = {{"fit", fhrd::fit_to_json(fit)}, {"meta", fhrd::meta_json(std::nullopt, 0)}};
    emit(fit_out, doc);
    return 0;
  }

  if (cmd_predict->parsed()) {
    const fhrd::Dataset ds = fhrd::load_dataset_csv(pred_dataset);
    json doc;
    fhrd::FitResult fit;
    if (!pred_params.empty()) {
      fit.params = params_from_json(parse_json_text_or_file(pred_params, "--params"));
      fit.converged = true;
    } else {
      fit = fhrd::fit(ds.records, pred_fit_flags.options);
      doc["fit"] = fhrd::fit_to_json(fit);
    }
    fhrd::PredictionSet pred = fhrd::predict_aeb(fit, ds.records);
    if (pred_bayes) {
      fhrd::add_bayes_predictions(pred, fit.params, ds.records, pred_quad_flags.options);
    }
    if (!pred_benchmark.empty()) {
      const fhrd::BenchmarkWeights weights = fhrd::load_weights_csv(pred_benchmark, ds);
      const std::vector<double> delta = fhrd::benchmark_cab(pred, ds.records, weights);
      double ybar = 0.0, wsum = 0.0;
      for (std::size_t j = 0; j < delta.size(); ++j) {
        ybar += weights.w[j] * ds.records[j].y;
        wsum += weights.w[j] * delta[j];
      }
      if (std::abs(wsum - ybar) > 1e-10 * std::max(1.0, std::abs(ybar))) {
        throw fhrd::NumericError("benchmark identity violated before write");
      }
      for (std::size_t j = 0; j < delta.size(); ++j) pred.areas[j].delta_cab = delta[j];
    }
    doc["predictions"] = fhrd::predictions_to_json(pred);
    doc["meta"] = fhrd::meta_json(std::nullopt, 0);
    emit(pred_out, doc);
    return 0;
  }

  if (cmd_mse->parsed()) {
    const fhrd::Dataset ds = fhrd::load_dataset_csv(mse_dataset);
    const fhrd::FitResult fit = fhrd::fit(ds.records, mse_fit_flags.options);
    fhrd::BootstrapOptions bo;
    bo.replicates = mse_replicates;
    bo.seed = fhrd::RngSeed{mse_seed, 0};
    bo.parallel = !mse_serial;
    bo.refit = mse_fit_flags.options;
    fhrd::PredictionSet pred = fhrd::predict_aeb(fit, ds.records);
    fhrd::MseReport report;
    if (!mse_benchmark.empty()) {
      const fhrd::BenchmarkWeights weights = fhrd::load_weights_csv(mse_benchmark, ds);
      report = fhrd::mse_cab(fit, ds.records, weights, bo);
      const std::vector<double> delta = fhrd::benchmark_cab(pred, ds.records, weights);
      for (std::size_t j = 0; j < delta.size(); ++j) pred.areas[j].delta_cab = delta[j];
    } else {
      report = fhrd::mse_aeb(fit, ds.records, bo);
    }
    json doc = {{"fit", fhrd::fit_to_json(fit)},
                {"predictions", fhrd::predictions_to_json(pred)},
                {"mse", fhrd::mse_to_json(report)},
                {"meta", fhrd::meta_json(mse_seed, mse_replicates)}};
    doc["meta"]["dropped_replicates"] = report.dropped;
    emit(mse_out, doc);
    return 0;
  }

  if (cmd_sim->parsed()) {
    fhrd::ExperimentSpec spec = spec_from_json(parse_json_text_or_file(sim_spec_path, "spec"));
    if (sim_desk) spec.desk = true;
    if (sim_serial) spec.parallel = false;
    if (sim_seed) spec.seed = *sim_seed;
    if (sim_replications) spec.replications = *sim_replications;
    const fhrd::ExperimentResult result = fhrd::run_study(spec);
    emit(sim_out, fhrd::experiment_to_json(result));
    if (!sim_out_csv.empty()) {
      fhrd::write_output(sim_out_csv, fhrd::experiment_to_csv(result));
    }
    if (!sim_out_table.empty()) {
      std::string table = fhrd::experiment_to_csv(result);
      for (auto& ch : table) {
        if (ch == ',') ch = ' ';
      }
      fhrd::write_output(sim_out_table, "# " + table);
    }
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const fhrd::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const fhrd::DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const fhrd::NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}
