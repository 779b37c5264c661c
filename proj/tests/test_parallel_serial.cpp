#include <doctest.h>

#include <cstring>
#include <numeric>
#include <vector>

#include "fhrd/estimation.hpp"
#include "fhrd/parallel.hpp"
#include "fhrd/sampling.hpp"
#include "fhrd/simulation.hpp"
#include "fhrd/uncertainty.hpp"

// The OpenMP kernels must agree bit for bit with the serial reference path
// under every worker count.

namespace {

std::vector<double> study_values(const fhrd::ExperimentResult& r) {
  std::vector<double> out;
  for (const auto& c : r.cells)
    for (const auto& s : c.stats) out.push_back(s.value);
  return out;
}

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  return std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("for_each_index covers every index exactly once") {
  for (bool parallel : {false, true}) {
    std::vector<int> hits(1000, 0);
    fhrd::for_each_index(1000, parallel, [&](int i) { hits[i]++; });
    CHECK(std::accumulate(hits.begin(), hits.end(), 0) == 1000);
    for (int h : hits) CHECK(h == 1);
  }
}

TEST_CASE("for_each_index propagates exceptions from the region") {
  CHECK_THROWS_AS(fhrd::for_each_index(64, true,
                                       [&](int i) {
                                         if (i == 17) throw fhrd::NumericError("boom");
                                       }),
                  fhrd::NumericError);
}

TEST_CASE("bootstrap kernel: serial reference equals OpenMP under 1/4/8 workers") {
  fhrd::ModelParams truth{{10.0}, 1.0, 4.0, 1.0};
  const std::vector<fhrd::DesignPoint> design(30, fhrd::DesignPoint{{1.0}, 10});
  const auto ds = fhrd::generate_fhrd(truth, design, fhrd::RngSeed{31, 0});
  const auto fr = fhrd::fit(ds.records);

  fhrd::BootstrapOptions options;
  options.replicates = 80;
  options.seed = {32, 0};

  options.parallel = false;
  const auto reference = fhrd::mse_aeb(fr, ds.records, options);

  options.parallel = true;
  for (int workers : {1, 4, 8}) {
    fhrd::set_workers(workers);
    const auto got = fhrd::mse_aeb(fr, ds.records, options);
    REQUIRE(got.areas.size() == reference.areas.size());
    for (std::size_t i = 0; i < got.areas.size(); ++i) {
      CHECK(std::memcmp(&got.areas[i].mse_aeb, &reference.areas[i].mse_aeb, sizeof(double)) == 0);
      CHECK(std::memcmp(&got.areas[i].g2_star, &reference.areas[i].g2_star, sizeof(double)) == 0);
    }
  }
  fhrd::set_workers(0);
}

TEST_CASE("study kernels: serial reference equals OpenMP under 1/4/8 workers") {
  fhrd::ExperimentSpec spec;
  spec.which = "custom";
  spec.cells = {{30, 4.0, 1.0}};
  spec.replications = 60;
  spec.seed = 33;

  spec.parallel = false;
  const auto reference = study_values(fhrd::run_predictor_study(spec));

  spec.parallel = true;
  for (int workers : {1, 4, 8}) {
    fhrd::set_workers(workers);
    CHECK(bitwise_equal(study_values(fhrd::run_predictor_study(spec)), reference));
  }
  fhrd::set_workers(0);

  fhrd::ExperimentSpec mse_spec;
  mse_spec.which = "table3";
  mse_spec.cells = {{30, 4.0, 1.0}};
  mse_spec.replications = 6;
  mse_spec.bootstrap = 30;
  mse_spec.true_mse_replications = 40;
  mse_spec.seed = 34;

  mse_spec.parallel = false;
  const auto mse_reference = study_values(fhrd::run_mse_study(mse_spec));
  mse_spec.parallel = true;
  for (int workers : {1, 4, 8}) {
    fhrd::set_workers(workers);
    CHECK(bitwise_equal(study_values(fhrd::run_mse_study(mse_spec)), mse_reference));
  }
  fhrd::set_workers(0);
}
