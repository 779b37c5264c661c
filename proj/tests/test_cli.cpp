#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

// End-to-end checks against the built binary.

namespace {

using nlohmann::json;

const std::string kCli = FHRD_CLI_PATH;
const std::string kData = FHRD_DATA_DIR;

struct RunResult {
  int exit_code = -1;
  std::string output;
};

RunResult run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " + kCli + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult r;
  char buf[4096];
  while (std::size_t got = fread(buf, 1, sizeof(buf), pipe)) r.output.append(buf, got);
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> csv_fields(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string f;
  while (std::getline(ss, f, ',')) out.push_back(f);
  return out;
}

std::string tmp_path(const std::string& name) {
  return std::string("cli_tmp_") + name;
}

}  // namespace

TEST_CASE("fit: happy path on the bundled dataset") {
  const auto out = tmp_path("fit.json");
  const auto r = run("fit " + kData + "/synthetic47.csv --out " + out);
  CAPTURE(r.output);
  REQUIRE(r.exit_code == 0);
  const json doc = json::parse(slurp(out));
  CHECK(doc.at("fit").at("beta").size() == 2);
  CHECK(doc.at("fit").at("tau2").get<double>() > 0.0);
  CHECK(doc.at("fit").at("alpha").get<double>() > 0.0);
  CHECK(doc.at("fit").at("gamma").get<double>() > 0.0);
  CHECK(doc.at("fit").at("diagnostics").contains("converged"));
  CHECK(doc.at("meta").at("version").is_string());
  std::remove(out.c_str());
}

TEST_CASE("fit: validation failure names the offending row") {
  const auto bad = tmp_path("bad.csv");
  {
    std::ofstream f(bad);
    f << "area_id,y,v,n,z1\n";
    f << "a1,10.0,1.0,10,1\n";
    f << "a2,11.0,0.0,10,1\n";  // v = 0
    f << "a3,12.0,2.0,10,1\n";
  }
  const auto r = run("fit " + bad);
  CHECK(r.exit_code == 2);
  CHECK(r.output.find(":3") != std::string::npos);  // line number of the bad row
  CHECK(r.output.find("v must be > 0") != std::string::npos);
  std::remove(bad.c_str());
}

TEST_CASE("fit: malformed input never crashes") {
  const auto bad = tmp_path("malformed.csv");
  {
    std::ofstream f(bad);
    f << "not,a,valid,header\ngarbage\n";
  }
  CHECK(run("fit " + bad).exit_code == 2);
  CHECK(run("fit /no/such/file.csv").exit_code == 2);
  CHECK(run("frobnicate x").exit_code == 2);
  CHECK(run("fit").exit_code == 2);
  std::remove(bad.c_str());
}

TEST_CASE("predict: benchmark identity, round trip, shrinkage pattern") {
  const auto out = tmp_path("pred.json");
  const auto r = run("predict " + kData + "/synthetic47.csv --benchmark " + kData +
                     "/weights47.csv --out " + out);
  CAPTURE(r.output);
  REQUIRE(r.exit_code == 0);
  const json doc = json::parse(slurp(out));
  const auto& preds = doc.at("predictions");
  REQUIRE(preds.size() == 47);

  // Raw weights, normalized the same way the loader does.
  std::vector<double> w;
  {
    std::ifstream wf(kData + "/weights47.csv");
    std::string line;
    std::getline(wf, line);
    double sum = 0.0;
    while (std::getline(wf, line)) {
      w.push_back(std::stod(csv_fields(line)[1]));
      sum += w.back();
    }
    for (double& x : w) x /= sum;
  }
  REQUIRE(w.size() == 47);

  double wsum_delta = 0.0, ybar = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    wsum_delta += w[i] * preds.at(i).at("delta_cab").get<double>();
    ybar += w[i] * preds.at(i).at("y").get<double>();
  }
  CHECK(std::abs(wsum_delta - ybar) < 1e-10 * std::max(1.0, std::abs(ybar)));

  // y values survive CSV -> JSON bit-exactly, and larger v gets a smaller
  // data weight 1 - b.
  std::ifstream df(kData + "/synthetic47.csv");
  std::string line;
  std::getline(df, line);
  std::vector<std::pair<double, double>> v_and_weight;
  std::size_t idx = 0;
  while (std::getline(df, line)) {
    const auto fields = csv_fields(line);
    const double y_csv = std::stod(fields[1]);
    const double y_json = preds.at(idx).at("y").get<double>();
    CHECK(std::memcmp(&y_csv, &y_json, sizeof(double)) == 0);
    v_and_weight.emplace_back(std::stod(fields[2]), 1.0 - preds.at(idx).at("b_i").get<double>());
    ++idx;
  }
  std::sort(v_and_weight.begin(), v_and_weight.end());
  for (std::size_t i = 1; i < v_and_weight.size(); ++i) {
    CHECK(v_and_weight[i].second < v_and_weight[i - 1].second);
  }
  std::remove(out.c_str());
}

TEST_CASE("predict: supplied parameters with tau2 = 0 pin predictions at synthetic") {
  const auto out = tmp_path("pred0.json");
  const auto r =
      run("predict " + kData + "/synthetic47.csv --bayes --params "
          "'{\"beta\":[16.0,0.15],\"tau2\":0.0,\"alpha\":2.5,\"gamma\":2.5}' --out " +
          out);
  CAPTURE(r.output);
  REQUIRE(r.exit_code == 0);
  const json doc = json::parse(slurp(out));
  CHECK_FALSE(doc.contains("fit"));
  for (const auto& p : doc.at("predictions")) {
    CHECK(p.at("xi_aeb").get<double>() == p.at("synthetic").get<double>());
    CHECK(p.at("xi_bayes").get<double>() == p.at("synthetic").get<double>());
    CHECK(p.at("e_i").get<double>() == 1.0);
  }
  std::remove(out.c_str());
}

TEST_CASE("predict: weight-file mismatch is a validation failure") {
  const auto wpath = tmp_path("wrong_weights.csv");
  {
    std::ofstream f(wpath);
    f << "area_id,w\nnonexistent,1.0\n";
  }
  const auto r = run("predict " + kData + "/synthetic47.csv --benchmark " + wpath);
  CHECK(r.exit_code == 2);
  std::remove(wpath.c_str());
}

TEST_CASE("mse: deterministic across runs and worker counts") {
  const auto out1 = tmp_path("mse1.json");
  const auto out2 = tmp_path("mse2.json");
  const std::string base =
      "mse " + kData + "/synthetic47.csv --replicates 60 --seed 42 --benchmark " + kData +
      "/weights47.csv --out ";

  REQUIRE(run(base + out1, "OMP_NUM_THREADS=1").exit_code == 0);
  REQUIRE(run(base + out2, "OMP_NUM_THREADS=4").exit_code == 0);
  CHECK(slurp(out1) == slurp(out2));
  REQUIRE(run(base + out2, "OMP_NUM_THREADS=8").exit_code == 0);
  CHECK(slurp(out1) == slurp(out2));

  const json doc = json::parse(slurp(out1));
  CHECK(doc.at("meta").at("seed").get<std::uint64_t>() == 42);
  CHECK(doc.at("meta").at("replicates").get<int>() == 60);
  REQUIRE(doc.at("mse").size() == 47);
  for (const auto& a : doc.at("mse")) {
    const double assembled = a.at("g11").get<double>() - a.at("g12").get<double>() +
                             a.at("g2").get<double>() - 2.0 * a.at("g3").get<double>();
    CHECK(std::abs(a.at("mse_aeb").get<double>() - assembled) < 1e-12);
    CHECK(a.contains("mse_cab"));
  }
  std::remove(out1.c_str());
  std::remove(out2.c_str());
}

TEST_CASE("simulate: spec validation and deterministic outputs") {
  const auto badspec = tmp_path("bad_spec.json");
  {
    std::ofstream f(badspec);
    f << "{\"which\": \"table9\"}\n";
  }
  CHECK(run("simulate " + badspec).exit_code == 2);
  std::remove(badspec.c_str());

  const auto spec = tmp_path("spec.json");
  {
    std::ofstream f(spec);
    f << "{\"which\":\"custom\",\"cells\":[{\"m\":30,\"alpha\":4.0,\"tau2\":1.0}],"
         "\"replications\":40,\"seed\":7}\n";
  }
  const auto o1 = tmp_path("sim1.json");
  const auto o2 = tmp_path("sim2.json");
  const auto c1 = tmp_path("sim1.csv");
  REQUIRE(run("simulate " + spec + " --out " + o1 + " --out-csv " + c1, "OMP_NUM_THREADS=2")
              .exit_code == 0);
  REQUIRE(run("simulate " + spec + " --out " + o2, "OMP_NUM_THREADS=8").exit_code == 0);
  CHECK(slurp(o1) == slurp(o2));

  const json doc = json::parse(slurp(o1));
  CHECK(doc.at("which") == "custom");
  CHECK(doc.at("cells").size() == 1);
  const std::string csv = slurp(c1);
  CHECK(csv.find("srmse_bayes") != std::string::npos);
  CHECK(csv.find("custom,30,") != std::string::npos);

  std::remove(spec.c_str());
  std::remove(o1.c_str());
  std::remove(o2.c_str());
  std::remove(c1.c_str());
}
