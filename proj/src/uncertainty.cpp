#include "fhrd/uncertainty.hpp"

#include <cmath>
#include <string>

#include "fhrd/model.hpp"
#include "fhrd/parallel.hpp"

namespace fhrd {

GFunctionValue g_function(double tau2, double alpha, double gamma, double v, int n) {
  if (!(n + alpha > 2.0)) throw DomainError("g_function: requires n + alpha > 2");
  const double b = shrinkage(tau2, alpha, gamma, v, n).b;
  GFunctionValue g;
  g.value = (v + gamma) / (n - 2.0 + alpha) * (1.0 - b) * (1.0 - b) + tau2 * b * b;
  g.tau2 = tau2;
  g.alpha = alpha;
  g.gamma = gamma;
  g.v = v;
  g.n = n;
  return g;
}

double g11_hat(const FitResult& fit, const AreaRecord& record) {
  return g_function(fit.params.tau2, fit.params.alpha, fit.params.gamma, record.v, record.n)
      .value;
}

ReplicateTerms replicate_terms(const FitResult& fit, const FitResult& refit,
                               const SyntheticDataset& boot, const BenchmarkWeights* weights) {
  const std::size_t m = boot.records.size();
  ReplicateTerms t;
  t.g12.resize(m);
  t.g2.resize(m);
  t.g3.resize(m);
  t.aeb_star.resize(m);

  const ModelParams& theta = fit.params;
  const ModelParams& theta_star = refit.params;

  for (std::size_t i = 0; i < m; ++i) {
    const AreaRecord& r = boot.records[i];
    const double synth = dot(r.z, theta.beta);          // z'beta_hat (original fit)
    const double synth_star = dot(r.z, theta_star.beta);

    const double b = shrinkage(theta.tau2, theta.alpha, theta.gamma, r.v, r.n).b;
    const double b_star =
        shrinkage(theta_star.tau2, theta_star.alpha, theta_star.gamma, r.v, r.n).b;

    t.g12[i] = g_function(theta_star.tau2, theta_star.alpha, theta_star.gamma, r.v, r.n).value -
               g_function(theta.tau2, theta.alpha, theta.gamma, r.v, r.n).value;

    const double d = (b_star - b) * (r.y - synth) - b_star * (synth_star - synth);
    t.g2[i] = d * d;

    const double ab_at_fit = (1.0 - b) * r.y + b * synth;
    t.g3[i] = (ab_at_fit - boot.latents[i].xi) * d;

    t.aeb_star[i] = synth_star + (1.0 - b_star) * (r.y - synth_star);
  }

  if (weights) {
    double ybar_star = 0.0, wsum_star = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      ybar_star += weights->w[j] * boot.records[j].y;
      wsum_star += weights->w[j] * t.aeb_star[j];
    }
    const double gap_star = ybar_star - wsum_star;
    t.j_term.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
      t.j_term[i] = (t.aeb_star[i] - boot.latents[i].xi) * gap_star;
    }
  }
  return t;
}

namespace {

MseReport bootstrap_mse(const FitResult& fit, const std::vector<AreaRecord>& data,
                        const BenchmarkWeights* weights, const BootstrapOptions& options) {
  validate_dataset(data);
  fit.params.validate();
  if (options.replicates < 1) throw DomainError("bootstrap: replicates must be >= 1");
  if (weights) {
    weights->validate();
    if (weights->w.size() != data.size()) {
      throw ValidationError("bootstrap: weight/data size mismatch");
    }
  }

  const std::size_t m = data.size();
  const auto design = design_from_records(data);
  const int reps = options.replicates;

  // Slot-per-replicate storage keeps the reduction order fixed and the
  // result independent of the parallel schedule.
  std::vector<ReplicateTerms> slots(reps);
  std::vector<char> ok(reps, 0);

  for_each_index(reps, options.parallel, [&](int b) {
    const RngSeed rep_seed{options.seed.seed,
                           derive_stream(options.seed.seed, options.seed.stream_id, 0x626f6f74ULL,
                                         static_cast<std::uint64_t>(b))};
    const SyntheticDataset boot = generate_bootstrap(fit.params, design, rep_seed);
    try {
      const FitResult refit = fhrd::fit(boot.records, options.refit);
      slots[b] = replicate_terms(fit, refit, boot, weights);
      ok[b] = 1;
    } catch (const DomainError&) {
      ok[b] = 0;
    } catch (const NumericError&) {
      ok[b] = 0;
    }
  });

  int used = 0;
  std::vector<double> g12(m, 0.0), g2(m, 0.0), g3(m, 0.0), jstar(m, 0.0);
  double gap_orig = 0.0, sum_sq = 0.0;

  PredictionSet original_pred = predict_aeb(fit, data);
  if (weights) {
    double ybar_w = 0.0, wsum_pred = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      ybar_w += weights->w[j] * data[j].y;
      wsum_pred += weights->w[j] * original_pred.areas[j].xi_aeb;
      sum_sq += weights->w[j] * weights->w[j];
    }
    gap_orig = ybar_w - wsum_pred;
  }

  for (int b = 0; b < reps; ++b) {
    if (!ok[b]) continue;
    ++used;
    const ReplicateTerms& t = slots[b];
    for (std::size_t i = 0; i < m; ++i) {
      g12[i] += t.g12[i];
      g2[i] += t.g2[i];
      g3[i] += t.g3[i];
      if (weights) jstar[i] += t.j_term[i];
    }
  }

  const int dropped = reps - used;
  if (used == 0 || static_cast<double>(dropped) / reps > options.max_drop_fraction) {
    throw NumericError("bootstrap: " + std::to_string(dropped) + " of " + std::to_string(reps) +
                       " replicate re-fits failed");
  }

  MseReport report;
  report.replicates = reps;
  report.dropped = dropped;
  report.seed = options.seed;
  report.has_benchmark = (weights != nullptr);
  report.areas.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    MseArea& a = report.areas[i];
    a.area_id = data[i].area_id;
    a.g11 = g11_hat(fit, data[i]);
    a.g12_star = g12[i] / used;
    a.g2_star = g2[i] / used;
    a.g3_star = g3[i] / used;
    a.mse_aeb = a.g11 - a.g12_star + a.g2_star - 2.0 * a.g3_star;
    if (weights) {
      a.squared_gap = gap_orig * gap_orig;
      a.j_star = jstar[i] / used;
      const double wi = weights->w[i];
      a.mse_cab = a.mse_aeb + wi * wi / (sum_sq * sum_sq) * a.squared_gap +
                  2.0 * wi / sum_sq * a.j_star;
    }
  }
  return report;
}

}  // namespace

MseReport mse_aeb(const FitResult& fit, const std::vector<AreaRecord>& data,
                  const BootstrapOptions& options) {
  return bootstrap_mse(fit, data, nullptr, options);
}

MseReport mse_cab(const FitResult& fit, const std::vector<AreaRecord>& data,
                  const BenchmarkWeights& weights, const BootstrapOptions& options) {
  return bootstrap_mse(fit, data, &weights, options);
}

}  // namespace fhrd
