#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "sparsedoa/geometry.hpp"
#include "sparsedoa/neural.hpp"

namespace sdoa {

enum class Method { None, Failed, Hybrid, DataDriven };

std::string_view to_string(Method m);
Method method_from_string(std::string_view name);

/// Complete description of a Monte Carlo experiment. Defaults follow the
/// full-scale protocol (the `paper` preset).
struct ExperimentConfig {
  std::string name = "paper";
  int mra_sensors = 10;              // used when `positions` is empty
  std::vector<int> positions;        // explicit geometry, units of d0
  int sources = 9;
  double angle_lo = 10.0;
  double angle_hi = 70.0;
  double min_gap = 5.0;
  int snapshots = 200;
  double train_snr_lo = -10.0;
  double train_snr_hi = 10.0;
  std::vector<double> test_snr_db;   // default -20:2:20
  int trials = 1000;
  FailurePolicy train_failures;
  std::vector<int> test_failed = {1, 5};  // 1-based sensor indices
  std::vector<Method> methods = {Method::None, Method::Failed, Method::Hybrid, Method::DataDriven};
  bool crb = true;
  double grid_step = 0.05;
  int train_samples = 300000;
  int epochs = 150;
  int batch_size = 256;
  double val_fraction = 0.2;
  AdamConfig adam;
  std::uint64_t master_seed = 1;
  int threads = 0;                   // 0 = OpenMP default

  ExperimentConfig();

  ArrayGeometry geometry() const;
  std::vector<int> test_failed_indices() const;  // 0-based
  bool uses(Method m) const;
  void validate() const;
};

/// "paper" (failures {1,5}), "paper-fig4" (failures {1,4}) or "desk".
ExperimentConfig preset(std::string_view name);

nlohmann::json to_json(const ExperimentConfig& c);
/// Overlays the keys present in `j` onto `base`.
ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig base = {});
ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base = {});

}  // namespace sdoa
