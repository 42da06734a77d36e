#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sparsedoa/config.hpp"
#include "sparsedoa/neural.hpp"
#include "sparsedoa/spectral.hpp"

namespace sdoa {

struct Models {
  std::optional<MlpModel> hybrid;
  std::optional<MlpModel> data_driven;
};

/// Scene seed for trial q at a given SNR. Independent of the method, so every
/// method sees the same angles, sources and noise.
std::uint64_t trial_seed(std::uint64_t master, double snr_db, int q);

struct TrialScene {
  std::uint64_t seed = 0;
  double snr_db = 0.0;
  std::vector<double> angles_deg;
  CovarianceMatrix R;  // full-array sample covariance
};

TrialScene make_trial_scene(const ExperimentConfig& config, const ArrayGeometry& geom, double snr_db, int q);

/// Covariance handed to MUSIC for `method` (smoothed or predicted, M_v x M_v).
CovarianceMatrix method_covariance(Method method, const CovarianceMatrix& R_full, const ArrayGeometry& geom,
                                   const std::vector<int>& failed, const Models& models);

struct TrialRecord {
  std::uint64_t seed = 0;
  double snr_db = 0.0;
  Method method = Method::None;
  std::vector<double> estimated_deg;
  std::vector<double> true_deg;
  std::vector<double> squared_error;
  bool resolution_failure = false;
  bool error = false;
  std::string error_message;
  double wall_ms = 0.0;
};

TrialRecord run_trial(const ExperimentConfig& config, const Models& models, Method method, double snr_db, int q);

struct SweepRow {
  Method method = Method::None;
  double snr_db = 0.0;
  double mse_deg2 = 0.0;
  double res_fail_rate = 0.0;
  double crb_deg2 = 0.0;  // NaN when the CRB is disabled
  int q = 0;              // trials that contributed
  int n_err = 0;          // trials excluded after a numeric error
};

struct SweepResult {
  std::vector<SweepRow> rows;         // method-major, SNR order of the config
  std::vector<TrialRecord> trials;    // (snr, q, method) order
  const SweepRow& row(Method m, double snr_db) const;
};

/// Runs all (SNR, trial) work items in parallel and reduces them in a fixed
/// order. `threads` <= 0 uses the config value (or the OpenMP default).
SweepResult run_sweep(const ExperimentConfig& config, const Models& models, int threads = 0);

std::string results_csv(const SweepResult& result);
std::string trials_csv(const SweepResult& result);

MusicSpectrum emit_spectrum(const ExperimentConfig& config, const Models& models, Method method, double snr_db,
                            std::uint64_t seed, std::vector<double>* true_angles = nullptr);
std::string spectrum_csv(const MusicSpectrum& spec);

// ---------------------------------------------------------------------------
// Training pipeline

DatasetSpec dataset_spec(const ExperimentConfig& config, Variant variant);
TrainOptions train_options(const ExperimentConfig& config, Variant variant);
MlpModel make_model(const ExperimentConfig& config, Variant variant);

/// Generates the dataset, builds and trains the model for `variant`.
/// `seed_offset` selects an alternative training seed (init, shuffling, dropout).
MlpModel train_variant(const ExperimentConfig& config, Variant variant, TrainHistory* history = nullptr,
                       std::uint64_t seed_offset = 0, const TrainingDataset* dataset = nullptr);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace sdoa
