#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sparsedoa/geometry.hpp"
#include "sparsedoa/kernels.hpp"
#include "sparsedoa/random.hpp"
#include "sparsedoa/signal.hpp"

namespace sdoa {

using kernels::Matrix;

enum class Variant { Hybrid, DataDriven, Custom };

std::string_view to_string(Variant v);
Variant variant_from_string(std::string_view name);

/// Per-feature min-max scaling to [0, 1]. Features whose fit range is empty
/// are flagged constant and passed through unscaled.
struct MinMaxStats {
  std::vector<double> min;
  std::vector<double> max;
  std::vector<bool> constant;

  std::size_t size() const { return min.size(); }
  bool empty() const { return min.empty(); }
  double apply(std::size_t j, double x) const {
    return constant[j] ? x : (x - min[j]) / (max[j] - min[j]);
  }
  double invert(std::size_t j, double y) const {
    return constant[j] ? y : min[j] + y * (max[j] - min[j]);
  }
  void apply(std::span<double> row) const;
  void invert(std::span<double> row) const;
};

/// Fits stats over the given rows of `data` (row-major, `dim` features per row).
/// An empty `rows` means all rows.
template <typename T>
MinMaxStats minmax_fit(std::span<const T> data, std::size_t dim, std::span<const std::size_t> rows = {});

struct DenseLayer {
  Matrix weights;             // fan_in x fan_out
  std::vector<double> bias;   // fan_out
  bool relu = true;
  double dropout = 0.0;       // drop probability applied after the activation

  std::size_t fan_in() const { return weights.rows; }
  std::size_t fan_out() const { return weights.cols; }
};

struct MlpModel {
  Variant variant = Variant::Custom;
  std::vector<DenseLayer> layers;
  MinMaxStats input_norm;
  MinMaxStats target_norm;
  int sensors = 0;  // M of the physical array (0 when not tied to one)
  int M_v = 0;      // smoothed covariance dimension predicted by the model
  std::uint64_t init_seed = 0;
  std::uint64_t train_seed = 0;
  std::string dataset_fingerprint;

  /// dims = {in, out_1, ..., out_n}; dropouts has n entries. Hidden layers use
  /// ReLU, the last layer is affine with identity output.
  static MlpModel build(const std::vector<int>& dims, const std::vector<double>& dropouts,
                        Variant variant = Variant::Custom);
  /// Four affine layers of width H = 2 M_v^2, dropout 0.2 and 0.4 after the first two.
  static MlpModel hybrid(int M_v);
  /// Five affine layers of widths [L, L, H, H, H] from input L = 2 M^2, dropout
  /// 0.2 after every non-output layer.
  static MlpModel data_driven(int M, int M_v);

  /// Glorot-uniform weights, zero biases.
  void init_weights(std::uint64_t seed);

  std::size_t input_dim() const { return layers.front().fan_in(); }
  std::size_t output_dim() const { return layers.back().fan_out(); }
  std::size_t parameter_count() const;

  std::vector<std::span<double>> parameters();
};

enum class Mode { Train, Infer };

struct ForwardCache {
  std::vector<Matrix> inputs;       // input to each layer
  std::vector<Matrix> pre;          // pre-activation of each layer
  std::vector<Matrix> masks;        // dropout multipliers (empty when no dropout)
};

/// Forward pass. Train mode applies inverted dropout drawn from `dropout_rng`
/// and fills `cache` when given; Infer mode is deterministic.
Matrix mlp_forward(const MlpModel& model, const Matrix& batch, Mode mode, Rng* dropout_rng = nullptr,
                   ForwardCache* cache = nullptr);

struct Gradients {
  std::vector<Matrix> weights;
  std::vector<std::vector<double>> bias;
  double loss = 0.0;

  std::vector<std::span<const double>> views() const;
};

/// Exact gradients of mean((y - t)^2) over all batch entries.
Gradients mlp_backward(const MlpModel& model, const ForwardCache& cache, const Matrix& output,
                       const Matrix& targets);

double mse_loss(const Matrix& output, const Matrix& targets);

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  AdamConfig config;
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  long step = 0;
};

AdamState adam_init(const AdamConfig& config, const std::vector<std::span<double>>& params);

/// One bias-corrected Adam update of `params` in place.
void adam_step(AdamState& state, const std::vector<std::span<double>>& params,
               const std::vector<std::span<const double>>& grads);

// ---------------------------------------------------------------------------
// Datasets

struct FailurePolicy {
  int min_failures = 1;
  int max_failures = 2;
  bool include_zero = false;

  /// Failure count uniform in the allowed range, then locations uniform without replacement.
  std::vector<int> draw(int M, Rng& rng) const;
};

struct DatasetSpec {
  Variant variant = Variant::Hybrid;
  std::vector<int> positions;
  int sources = 3;
  double angle_lo = 10.0;
  double angle_hi = 70.0;
  double min_gap = 5.0;
  int snapshots = 200;
  double snr_lo = -10.0;
  double snr_hi = 10.0;
  FailurePolicy failures;
  int samples = 1000;
  std::uint64_t seed = 1;
};

struct TrainingDataset {
  DatasetSpec spec;
  std::size_t input_dim = 0;
  std::size_t target_dim = 0;
  std::vector<float> inputs;   // samples x input_dim
  std::vector<float> targets;  // samples x target_dim

  std::size_t size() const { return input_dim ? inputs.size() / input_dim : 0; }
  std::string fingerprint() const;
};

/// Model input for a given variant from the full-array sample covariance and a failure set.
std::vector<double> model_input(Variant variant, const CovarianceMatrix& R_full, const ArrayGeometry& geom,
                                const std::vector<int>& failed);
/// Target features: smoothed covariance of the failure-free array.
std::vector<double> model_target(const CovarianceMatrix& R_full, const ArrayGeometry& geom);

/// Samples are independent and seeded per index, so generation runs in parallel
/// and the result does not depend on the thread count.
TrainingDataset generate_dataset(const DatasetSpec& spec);

// ---------------------------------------------------------------------------
// Training

struct TrainOptions {
  int epochs = 150;
  int batch_size = 256;
  double val_fraction = 0.2;
  AdamConfig adam;
  std::uint64_t seed = 1;
};

struct TrainHistory {
  double initial_val_loss = 0.0;
  std::vector<double> train_loss;
  std::vector<double> val_loss;
};

class TrainingDiverged : public Error {
 public:
  TrainingDiverged(const std::string& what, TrainHistory history)
      : Error(what), history_(std::move(history)) {}
  const TrainHistory& history() const { return history_; }

 private:
  TrainHistory history_;
};

/// Mini-batch Adam on the shuffled training split. Normalization statistics are
/// fit on the training split only and stored in the model.
TrainHistory train(MlpModel& model, const TrainingDataset& data, const TrainOptions& options);

/// features -> normalize -> forward (infer) -> denormalize -> Hermitian M_v x M_v.
CovarianceMatrix predict_covariance(const MlpModel& model, const CovarianceMatrix& input);

}  // namespace sdoa
