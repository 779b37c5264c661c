#include "fhrd/csv.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace fhrd {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

[[noreturn]] void fail(const std::string& path, std::size_t line_no, const std::string& msg) {
  throw ValidationError(path + ":" + std::to_string(line_no) + ": " + msg);
}

double parse_double(const std::string& path, std::size_t line_no, const std::string& field,
                    const std::string& name) {
  if (field.empty()) fail(path, line_no, "missing value for " + name);
  errno = 0;
  char* end = nullptr;
  const double x = std::strtod(field.c_str(), &end);
  if (end == field.c_str() || *end != '\0' || errno == ERANGE || !std::isfinite(x)) {
    fail(path, line_no, "cannot parse " + name + " from '" + field + "'");
  }
  return x;
}

long parse_long(const std::string& path, std::size_t line_no, const std::string& field,
                const std::string& name) {
  if (field.empty()) fail(path, line_no, "missing value for " + name);
  errno = 0;
  char* end = nullptr;
  const long x = std::strtol(field.c_str(), &end, 10);
  if (end == field.c_str() || *end != '\0' || errno == ERANGE) {
    fail(path, line_no, "cannot parse " + name + " from '" + field + "'");
  }
  return x;
}

}  // namespace

Dataset load_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open dataset file '" + path + "'");

  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ValidationError(path + ": empty file");
  ++line_no;
  const auto header = split_csv_line(line);
  if (header.size() < 5 || header[0] != "area_id" || header[1] != "y" || header[2] != "v" ||
      header[3] != "n" || header[4] != "z1") {
    fail(path, line_no, "header must start with area_id,y,v,n,z1");
  }
  const std::size_t p = header.size() - 4;
  for (std::size_t j = 0; j < p; ++j) {
    if (header[4 + j] != "z" + std::to_string(j + 1)) {
      fail(path, line_no, "covariate columns must be named z1..z" + std::to_string(p));
    }
  }

  Dataset ds;
  ds.p = p;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 4 + p) {
      fail(path, line_no,
           "expected " + std::to_string(4 + p) + " fields, got " + std::to_string(fields.size()));
    }
    AreaRecord r;
    r.area_id = fields[0];
    if (r.area_id.empty()) fail(path, line_no, "missing area_id");
    r.y = parse_double(path, line_no, fields[1], "y");
    r.v = parse_double(path, line_no, fields[2], "v");
    if (!(r.v > 0.0)) fail(path, line_no, "v must be > 0, got " + fields[2]);
    const long n = parse_long(path, line_no, fields[3], "n");
    if (n < 1 || n > 1000000) fail(path, line_no, "n must be in [1, 1e6], got " + fields[3]);
    r.n = static_cast<int>(n);
    r.z.resize(p);
    for (std::size_t j = 0; j < p; ++j) {
      r.z[j] = parse_double(path, line_no, fields[4 + j], "z" + std::to_string(j + 1));
    }
    if (r.z[0] != 1.0) fail(path, line_no, "z1 must equal 1");
    ds.records.push_back(std::move(r));
  }
  if (ds.records.empty()) throw ValidationError(path + ": no data rows");

  for (std::size_t i = 0; i < ds.records.size(); ++i) {
    for (std::size_t j = i + 1; j < ds.records.size(); ++j) {
      if (ds.records[i].area_id == ds.records[j].area_id) {
        throw ValidationError(path + ": duplicate area_id '" + ds.records[i].area_id + "'");
      }
    }
  }
  return ds;
}

BenchmarkWeights load_weights_csv(const std::string& path, const Dataset& dataset) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open weights file '" + path + "'");

  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ValidationError(path + ": empty file");
  ++line_no;
  const auto header = split_csv_line(line);
  if (header.size() != 2 || header[0] != "area_id" || header[1] != "w") {
    fail(path, line_no, "header must be area_id,w");
  }

  std::unordered_map<std::string, double> by_id;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 2) fail(path, line_no, "expected 2 fields");
    const double w = parse_double(path, line_no, fields[1], "w");
    if (w < 0.0) fail(path, line_no, "weights must be nonnegative");
    if (!by_id.emplace(fields[0], w).second) {
      fail(path, line_no, "duplicate area_id '" + fields[0] + "'");
    }
  }

  BenchmarkWeights weights;
  weights.w.resize(dataset.records.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < dataset.records.size(); ++i) {
    const auto it = by_id.find(dataset.records[i].area_id);
    if (it == by_id.end()) {
      throw ValidationError(path + ": no weight for area_id '" + dataset.records[i].area_id + "'");
    }
    weights.w[i] = it->second;
    sum += it->second;
  }
  if (by_id.size() != dataset.records.size()) {
    throw ValidationError(path + ": weight rows do not match the dataset areas");
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ValidationError(path + ": weights sum to " + std::to_string(sum) +
                          ", must equal 1 within 1e-9");
  }
  for (double& w : weights.w) w /= sum;
  weights.validate();
  return weights;
}

}  // namespace fhrd
