#include "fhrd/result_json.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>

namespace fhrd {

using nlohmann::json;

json fit_to_json(const FitResult& fit) {
  json diagnostics = {
      {"iterations", fit.iterations},
      {"converged", fit.converged},
      {"tau2_truncated", fit.tau2_truncated},
      {"alpha_fallback_used", fit.alpha_fallback_used},
      {"alpha_capped", fit.alpha_capped},
      {"small_df_warning", fit.small_df_warning},
      {"residual_norm", fit.residual_norm},
      {"ols_beta", fit.ols_beta},
  };
  return json{
      {"beta", fit.params.beta},   {"tau2", fit.params.tau2},
      {"alpha", fit.params.alpha}, {"gamma", fit.params.gamma},
      {"diagnostics", diagnostics},
  };
}

json predictions_to_json(const PredictionSet& set) {
  json arr = json::array();
  for (const auto& a : set.areas) {
    json row = {
        {"area_id", a.area_id}, {"y", a.y},           {"synthetic", a.synthetic},
        {"b_i", a.b},           {"xi_aeb", a.xi_aeb},
    };
    if (a.xi_bayes) {
      row["xi_bayes"] = *a.xi_bayes;
      row["e_i"] = *a.e;
    }
    if (a.delta_cab) row["delta_cab"] = *a.delta_cab;
    arr.push_back(std::move(row));
  }
  return arr;
}

json mse_to_json(const MseReport& report) {
  json arr = json::array();
  for (const auto& a : report.areas) {
    json row = {
        {"area_id", a.area_id},     {"g11", a.g11}, {"g12", a.g12_star},
        {"g2", a.g2_star},          {"g3", a.g3_star},
        {"mse_aeb", a.mse_aeb},
    };
    if (report.has_benchmark) {
      row["squared_gap"] = a.squared_gap;
      row["j_star"] = a.j_star;
      row["mse_cab"] = a.mse_cab;
    }
    arr.push_back(std::move(row));
  }
  return arr;
}

json meta_json(std::optional<std::uint64_t> seed, int replicates) {
  json meta = {{"replicates", replicates}, {"version", kVersion}};
  if (seed) {
    meta["seed"] = *seed;
  } else {
    meta["seed"] = nullptr;
  }
  return meta;
}

json experiment_to_json(const ExperimentResult& result) {
  json cells = json::array();
  for (const auto& c : result.cells) {
    json stats;
    for (const auto& s : c.stats) stats[s.name] = s.value;
    cells.push_back(json{{"m", c.cell.m},
                         {"alpha", c.cell.alpha},
                         {"tau2", c.cell.tau2},
                         {"stats", stats}});
  }
  return json{{"which", result.which},
              {"cells", cells},
              {"meta", {{"seed", result.seed}, {"version", kVersion}}}};
}

namespace {

std::string format_full(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace

std::string experiment_to_csv(const ExperimentResult& result) {
  std::string out = "which,m,alpha,tau2";
  if (!result.cells.empty()) {
    for (const auto& s : result.cells.front().stats) out += "," + s.name;
  }
  out += "\n";
  for (const auto& c : result.cells) {
    out += result.which + "," + std::to_string(c.cell.m) + "," + format_full(c.cell.alpha) + "," +
           format_full(c.cell.tau2);
    for (const auto& s : c.stats) out += "," + format_full(s.value);
    out += "\n";
  }
  return out;
}

void write_output(const std::string& path, const std::string& contents) {
  if (path.empty()) {
    std::cout << contents;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open output file '" + path + "'");
  out << contents;
  if (!out) throw ValidationError("failed writing output file '" + path + "'");
}

}  // namespace fhrd
