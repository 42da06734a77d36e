#include "sparsedoa/harness.hpp"

#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "sparsedoa/coarray.hpp"

namespace sdoa {

std::uint64_t trial_seed(std::uint64_t master, double snr_db, int q) {
  const auto snr_key = static_cast<std::uint64_t>(std::llround(snr_db * 1000.0));
  return derive_seed(master, {hash_name("trial"), snr_key, static_cast<std::uint64_t>(q)});
}

TrialScene make_trial_scene(const ExperimentConfig& config, const ArrayGeometry& geom, double snr_db, int q) {
  TrialScene s;
  s.seed = trial_seed(config.master_seed, snr_db, q);
  s.snr_db = snr_db;
  Rng rng(s.seed);
  s.angles_deg = draw_angles(config.sources, config.angle_lo, config.angle_hi, config.min_gap, rng);
  const auto scene = SourceScene::equal_power(s.angles_deg, snr_db);
  s.R = sample_covariance(simulate_snapshots(geom, scene, config.snapshots, rng));
  return s;
}

CovarianceMatrix method_covariance(Method method, const CovarianceMatrix& R_full, const ArrayGeometry& geom,
                                   const std::vector<int>& failed, const Models& models) {
  switch (method) {
    case Method::None:
      return spatial_smoothing(redundancy_average(R_full, geom.without_failures()));
    case Method::Failed:
      return spatial_smoothing(redundancy_average(inject_failures(R_full, failed), geom.with_failures(failed)));
    case Method::Hybrid: {
      if (!models.hybrid) throw Error("hybrid method requested without a hybrid model");
      const auto R_sm =
          spatial_smoothing(redundancy_average(inject_failures(R_full, failed), geom.with_failures(failed)));
      return predict_covariance(*models.hybrid, R_sm);
    }
    case Method::DataDriven:
      if (!models.data_driven) throw Error("data-driven method requested without a data-driven model");
      return predict_covariance(*models.data_driven, inject_failures(R_full, failed));
  }
  throw Error("unknown method");
}

namespace {

TrialRecord evaluate(const ExperimentConfig& config, const ArrayGeometry& geom, const std::vector<int>& failed,
                     const Models& models, Method method, const TrialScene& scene) {
  const auto t0 = std::chrono::steady_clock::now();
  TrialRecord rec;
  rec.seed = scene.seed;
  rec.snr_db = scene.snr_db;
  rec.method = method;
  rec.true_deg = scene.angles_deg;
  try {
    const auto R = method_covariance(method, scene.R, geom, failed, models);
    const auto spec = music_spectrum(R, config.sources, config.grid_step, virtual_ula(R.dim()));
    const auto peaks = pick_peaks(spec, config.sources);
    rec.estimated_deg = peaks.angles_deg;
    rec.resolution_failure = peaks.resolution_failure;
    for (std::size_t k = 0; k < rec.true_deg.size(); ++k) {
      const double d = rec.estimated_deg[k] - rec.true_deg[k];
      rec.squared_error.push_back(d * d);
    }
  } catch (const std::exception& e) {
    rec.error = true;
    rec.error_message = e.what();
  }
  rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

TrialRecord run_trial(const ExperimentConfig& config, const Models& models, Method method, double snr_db, int q) {
  const auto geom = config.geometry();
  const auto scene = make_trial_scene(config, geom, snr_db, q);
  return evaluate(config, geom, config.test_failed_indices(), models, method, scene);
}

const SweepRow& SweepResult::row(Method m, double snr_db) const {
  for (const auto& r : rows)
    if (r.method == m && r.snr_db == snr_db) return r;
  throw Error("sweep result has no row for " + std::string(to_string(m)) + " at " + fmt(snr_db) + " dB");
}

SweepResult run_sweep(const ExperimentConfig& config, const Models& models, int threads) {
  config.validate();
  const auto geom = config.geometry();
  const auto failed = config.test_failed_indices();
  const auto n_snr = config.test_snr_db.size();
  const auto n_q = static_cast<std::size_t>(config.trials);
  const auto n_m = config.methods.size();
  const std::size_t items = n_snr * n_q;

  std::vector<TrialRecord> records(items * n_m);
  std::vector<double> crb_values(items, std::numeric_limits<double>::quiet_NaN());

  const int workers = threads > 0 ? threads : (config.threads > 0 ? config.threads : omp_get_max_threads());
  const auto total = static_cast<long long>(items);
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
  for (long long item = 0; item < total; ++item) {
    const auto s = static_cast<std::size_t>(item) / n_q;
    const auto q = static_cast<int>(static_cast<std::size_t>(item) % n_q);
    const double snr = config.test_snr_db[s];
    try {
      const auto scene = make_trial_scene(config, geom, snr, q);
      for (std::size_t m = 0; m < n_m; ++m)
        records[static_cast<std::size_t>(item) * n_m + m] = evaluate(config, geom, failed, models, config.methods[m], scene);
      if (config.crb) {
        try {
          crb_values[static_cast<std::size_t>(item)] =
              crb(geom, SourceScene::equal_power(scene.angles_deg, snr), config.snapshots).mean_deg2();
        } catch (const Error&) {
        }
      }
    } catch (const std::exception& e) {
      for (std::size_t m = 0; m < n_m; ++m) {
        auto& rec = records[static_cast<std::size_t>(item) * n_m + m];
        rec.snr_db = snr;
        rec.method = config.methods[m];
        rec.error = true;
        rec.error_message = e.what();
      }
    }
  }

  SweepResult result;
  for (std::size_t m = 0; m < n_m; ++m) {
    for (std::size_t s = 0; s < n_snr; ++s) {
      SweepRow row;
      row.method = config.methods[m];
      row.snr_db = config.test_snr_db[s];
      std::vector<std::vector<double>> est, truth;
      int res_fail = 0;
      double crb_sum = 0.0;
      int crb_n = 0;
      for (std::size_t q = 0; q < n_q; ++q) {
        const std::size_t item = s * n_q + q;
        const auto& rec = records[item * n_m + m];
        if (rec.error) {
          ++row.n_err;
        } else {
          est.push_back(rec.estimated_deg);
          truth.push_back(rec.true_deg);
          res_fail += rec.resolution_failure ? 1 : 0;
        }
        if (!std::isnan(crb_values[item])) {
          crb_sum += crb_values[item];
          ++crb_n;
        }
      }
      row.q = static_cast<int>(est.size());
      row.mse_deg2 = est.empty() ? std::numeric_limits<double>::quiet_NaN() : doa_mse(est, truth);
      row.res_fail_rate = est.empty() ? std::numeric_limits<double>::quiet_NaN()
                                      : static_cast<double>(res_fail) / static_cast<double>(est.size());
      row.crb_deg2 = crb_n > 0 ? crb_sum / crb_n : std::numeric_limits<double>::quiet_NaN();
      result.rows.push_back(row);
    }
  }
  result.trials = std::move(records);
  return result;
}

std::string results_csv(const SweepResult& result) {
  std::string out = "method,snr_db,mse_deg2,res_fail_rate,crb_deg2,q,n_err\n";
  for (const auto& r : result.rows) {
    out += std::string(to_string(r.method)) + "," + fmt(r.snr_db) + "," + fmt(r.mse_deg2) + "," +
           fmt(r.res_fail_rate) + "," + fmt(r.crb_deg2) + "," + std::to_string(r.q) + "," +
           std::to_string(r.n_err) + "\n";
  }
  return out;
}

std::string trials_csv(const SweepResult& result) {
  auto join = [](const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ";" : "") + fmt(v[i]);
    return s;
  };
  std::string out = "seed,snr_db,method,true_deg,estimated_deg,squared_error,res_fail,error,wall_ms\n";
  for (const auto& r : result.trials) {
    out += std::to_string(r.seed) + "," + fmt(r.snr_db) + "," + std::string(to_string(r.method)) + "," +
           join(r.true_deg) + "," + join(r.estimated_deg) + "," + join(r.squared_error) + "," +
           (r.resolution_failure ? "1" : "0") + "," + (r.error ? "1" : "0") + "," + fmt(r.wall_ms) + "\n";
  }
  return out;
}

MusicSpectrum emit_spectrum(const ExperimentConfig& config, const Models& models, Method method, double snr_db,
                            std::uint64_t seed, std::vector<double>* true_angles) {
  ExperimentConfig c = config;
  c.master_seed = seed;
  const auto geom = c.geometry();
  const auto scene = make_trial_scene(c, geom, snr_db, 0);
  if (true_angles) *true_angles = scene.angles_deg;
  const auto R = method_covariance(method, scene.R, geom, c.test_failed_indices(), models);
  return music_spectrum(R, c.sources, c.grid_step, virtual_ula(R.dim()));
}

std::string spectrum_csv(const MusicSpectrum& spec) {
  std::string out = "angle_deg,pseudospectrum\n";
  for (std::size_t i = 0; i < spec.grid_deg.size(); ++i) out += fmt(spec.grid_deg[i]) + "," + fmt(spec.values[i]) + "\n";
  return out;
}

DatasetSpec dataset_spec(const ExperimentConfig& config, Variant variant) {
  DatasetSpec s;
  s.variant = variant;
  s.positions = config.geometry().positions();
  s.sources = config.sources;
  s.angle_lo = config.angle_lo;
  s.angle_hi = config.angle_hi;
  s.min_gap = config.min_gap;
  s.snapshots = config.snapshots;
  s.snr_lo = config.train_snr_lo;
  s.snr_hi = config.train_snr_hi;
  s.failures = config.train_failures;
  s.samples = config.train_samples;
  // Both variants train on the same scenes.
  s.seed = derive_seed(config.master_seed, {hash_name("dataset")});
  return s;
}

TrainOptions train_options(const ExperimentConfig& config, Variant variant) {
  TrainOptions o;
  o.epochs = config.epochs;
  o.batch_size = config.batch_size;
  o.val_fraction = config.val_fraction;
  o.adam = config.adam;
  o.seed = derive_seed(config.master_seed, {hash_name("train"), hash_name(to_string(variant))});
  return o;
}

MlpModel make_model(const ExperimentConfig& config, Variant variant) {
  const auto geom = config.geometry();
  const int M_v = difference_coarray(geom).M_v;
  switch (variant) {
    case Variant::Hybrid: {
      auto m = MlpModel::hybrid(M_v);
      m.sensors = geom.size();
      return m;
    }
    case Variant::DataDriven: return MlpModel::data_driven(geom.size(), M_v);
    case Variant::Custom: break;
  }
  throw Error("make_model: variant must be hybrid or data-driven");
}

MlpModel train_variant(const ExperimentConfig& config, Variant variant, TrainHistory* history,
                       std::uint64_t seed_offset, const TrainingDataset* dataset) {
  std::optional<TrainingDataset> owned;
  if (!dataset) {
    owned = generate_dataset(dataset_spec(config, variant));
    dataset = &*owned;
  }
  auto model = make_model(config, variant);
  auto options = train_options(config, variant);
  if (seed_offset != 0) options.seed = derive_seed(options.seed, {seed_offset});
  model.init_weights(derive_seed(options.seed, {hash_name("init")}));
  auto h = train(model, *dataset, options);
  if (history) *history = std::move(h);
  return model;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << text;
}

}  // namespace sdoa
