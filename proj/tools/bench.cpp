// Timing harness: runs the bootstrap-MSE and predictor-study kernels once on
// the serial reference path and once under OpenMP, checks the outputs are
// bit-identical, and reports the speedup.

#include <chrono>
#include <cstdio>
#include <cstring>

#include "fhrd/estimation.hpp"
#include "fhrd/parallel.hpp"
#include "fhrd/sampling.hpp"
#include "fhrd/simulation.hpp"
#include "fhrd/uncertainty.hpp"

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool identical(const fhrd::MseReport& a, const fhrd::MseReport& b) {
  if (a.areas.size() != b.areas.size() || a.dropped != b.dropped) return false;
  for (std::size_t i = 0; i < a.areas.size(); ++i) {
    if (std::memcmp(&a.areas[i].mse_aeb, &b.areas[i].mse_aeb, sizeof(double)) != 0) return false;
  }
  return true;
}

bool identical(const fhrd::ExperimentResult& a, const fhrd::ExperimentResult& b) {
  if (a.cells.size() != b.cells.size()) return false;
  for (std::size_t c = 0; c < a.cells.size(); ++c) {
    for (std::size_t s = 0; s < a.cells[c].stats.size(); ++s) {
      if (std::memcmp(&a.cells[c].stats[s].value, &b.cells[c].stats[s].value, sizeof(double)) !=
          0) {
        return false;
      }
    }
  }
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  int replicates = 1000;
  if (argc > 1) replicates = std::atoi(argv[1]);
  std::printf("workers available: %d\n", fhrd::max_workers());

  // Bootstrap MSE kernel.
  fhrd::ModelParams truth{{10.0}, 1.0, 4.0, 1.0};
  const std::vector<fhrd::DesignPoint> design(30, fhrd::DesignPoint{{1.0}, 10});
  const fhrd::SyntheticDataset ds = fhrd::generate_fhrd(truth, design, {42, 0});
  const fhrd::FitResult fit = fhrd::fit(ds.records);

  fhrd::BootstrapOptions bo;
  bo.replicates = replicates;
  bo.seed = {42, 7};

  bo.parallel = false;
  auto t0 = std::chrono::steady_clock::now();
  const fhrd::MseReport serial = fhrd::mse_aeb(fit, ds.records, bo);
  const double t_serial = seconds_since(t0);

  bo.parallel = true;
  t0 = std::chrono::steady_clock::now();
  const fhrd::MseReport parallel = fhrd::mse_aeb(fit, ds.records, bo);
  const double t_parallel = seconds_since(t0);

  std::printf("bootstrap mse  (B=%d):  serial %.3fs  parallel %.3fs  speedup %.2fx  %s\n",
              replicates, t_serial, t_parallel, t_serial / t_parallel,
              identical(serial, parallel) ? "bit-identical" : "MISMATCH");

  // Predictor-study kernel (quadrature heavy).
  fhrd::ExperimentSpec spec;
  spec.which = "custom";
  spec.cells = {{30, 1.0, 1.0}};
  spec.replications = std::max(200, replicates / 2);

  spec.parallel = false;
  t0 = std::chrono::steady_clock::now();
  const fhrd::ExperimentResult r_serial = fhrd::run_predictor_study(spec);
  const double p_serial = seconds_since(t0);

  spec.parallel = true;
  t0 = std::chrono::steady_clock::now();
  const fhrd::ExperimentResult r_parallel = fhrd::run_predictor_study(spec);
  const double p_parallel = seconds_since(t0);

  std::printf("predictor study (K=%d): serial %.3fs  parallel %.3fs  speedup %.2fx  %s\n",
              spec.replications, p_serial, p_parallel, p_serial / p_parallel,
              identical(r_serial, r_parallel) ? "bit-identical" : "MISMATCH");

  const bool ok = identical(serial, parallel) && identical(r_serial, r_parallel);
  return ok ? 0 : 1;
}
