#include "sparsedoa/neural.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "sparsedoa/coarray.hpp"

namespace sdoa {

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::Hybrid: return "hybrid";
    case Variant::DataDriven: return "data-driven";
    case Variant::Custom: return "custom";
  }
  return "custom";
}

Variant variant_from_string(std::string_view name) {
  if (name == "hybrid") return Variant::Hybrid;
  if (name == "data-driven") return Variant::DataDriven;
  if (name == "custom") return Variant::Custom;
  throw Error("unknown model variant '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Min-max normalization

void MinMaxStats::apply(std::span<double> row) const {
  if (row.size() != size()) throw Error("minmax_apply: feature count mismatch");
  for (std::size_t j = 0; j < row.size(); ++j) row[j] = apply(j, row[j]);
}

void MinMaxStats::invert(std::span<double> row) const {
  if (row.size() != size()) throw Error("minmax_invert: feature count mismatch");
  for (std::size_t j = 0; j < row.size(); ++j) row[j] = invert(j, row[j]);
}

template <typename T>
MinMaxStats minmax_fit(std::span<const T> data, std::size_t dim, std::span<const std::size_t> rows) {
  if (dim == 0 || data.size() % dim != 0) throw Error("minmax_fit: data is not a whole number of rows");
  const std::size_t n = data.size() / dim;
  std::vector<std::size_t> all;
  if (rows.empty()) {
    all.resize(n);
    std::iota(all.begin(), all.end(), std::size_t{0});
    rows = all;
  }
  if (rows.size() < 2) throw Error("minmax_fit: need at least two rows");
  MinMaxStats s;
  s.min.assign(dim, std::numeric_limits<double>::infinity());
  s.max.assign(dim, -std::numeric_limits<double>::infinity());
  for (auto r : rows) {
    if (r >= n) throw Error("minmax_fit: row index out of range");
    const T* x = data.data() + r * dim;
    for (std::size_t j = 0; j < dim; ++j) {
      const double v = static_cast<double>(x[j]);
      if (!std::isfinite(v)) throw Error("minmax_fit: non-finite input");
      s.min[j] = std::min(s.min[j], v);
      s.max[j] = std::max(s.max[j], v);
    }
  }
  s.constant.resize(dim);
  for (std::size_t j = 0; j < dim; ++j) s.constant[j] = !(s.max[j] > s.min[j]);
  return s;
}

template MinMaxStats minmax_fit<float>(std::span<const float>, std::size_t, std::span<const std::size_t>);
template MinMaxStats minmax_fit<double>(std::span<const double>, std::size_t, std::span<const std::size_t>);

// ---------------------------------------------------------------------------
// Model construction

MlpModel MlpModel::build(const std::vector<int>& dims, const std::vector<double>& dropouts, Variant variant) {
  if (dims.size() < 2) throw Error("MlpModel::build: need at least one layer");
  if (dropouts.size() != dims.size() - 1) throw Error("MlpModel::build: one dropout rate per layer");
  MlpModel m;
  m.variant = variant;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    if (dims[l] < 1 || dims[l + 1] < 1) throw Error("MlpModel::build: layer widths must be positive");
    if (!(dropouts[l] >= 0.0 && dropouts[l] < 1.0)) throw Error("MlpModel::build: dropout must be in [0, 1)");
    DenseLayer layer;
    layer.weights = Matrix(static_cast<std::size_t>(dims[l]), static_cast<std::size_t>(dims[l + 1]));
    layer.bias.assign(static_cast<std::size_t>(dims[l + 1]), 0.0);
    layer.relu = l + 2 < dims.size();
    layer.dropout = dropouts[l];
    m.layers.push_back(std::move(layer));
  }
  if (m.layers.back().dropout != 0.0) throw Error("MlpModel::build: no dropout after the output layer");
  return m;
}

MlpModel MlpModel::hybrid(int M_v) {
  const int H = 2 * M_v * M_v;
  auto m = build({H, H, H, H, H}, {0.2, 0.4, 0.0, 0.0}, Variant::Hybrid);
  m.M_v = M_v;
  return m;
}

MlpModel MlpModel::data_driven(int M, int M_v) {
  const int H = 2 * M_v * M_v;
  const int L = 2 * M * M;
  auto m = build({L, L, L, H, H, H}, {0.2, 0.2, 0.2, 0.2, 0.0}, Variant::DataDriven);
  m.sensors = M;
  m.M_v = M_v;
  return m;
}

void MlpModel::init_weights(std::uint64_t seed) {
  init_seed = seed;
  Rng rng(seed);
  for (auto& layer : layers) {
    const double limit = std::sqrt(6.0 / static_cast<double>(layer.fan_in() + layer.fan_out()));
    for (auto& w : layer.weights.data) w = rng.uniform(-limit, limit);
    std::fill(layer.bias.begin(), layer.bias.end(), 0.0);
  }
}

std::size_t MlpModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weights.data.size() + l.bias.size();
  return n;
}

std::vector<std::span<double>> MlpModel::parameters() {
  std::vector<std::span<double>> out;
  for (auto& l : layers) {
    out.emplace_back(l.weights.data);
    out.emplace_back(l.bias);
  }
  return out;
}

std::vector<std::span<const double>> Gradients::views() const {
  std::vector<std::span<const double>> out;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    out.emplace_back(weights[l].data);
    out.emplace_back(bias[l]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Forward / backward

Matrix mlp_forward(const MlpModel& model, const Matrix& batch, Mode mode, Rng* dropout_rng, ForwardCache* cache) {
  if (model.layers.empty()) throw Error("mlp_forward: empty model");
  if (batch.cols != model.input_dim()) throw Error("mlp_forward: input dimension mismatch");
  if (cache) *cache = {};
  Matrix x = batch;
  for (const auto& layer : model.layers) {
    Matrix z;
    kernels::gemm_nn(x, layer.weights, z);
    kernels::add_row_vector(z, layer.bias);
    Matrix a = z;
    if (layer.relu)
      for (auto& v : a.data) v = v > 0.0 ? v : 0.0;
    Matrix mask;
    if (mode == Mode::Train && layer.dropout > 0.0) {
      if (!dropout_rng) throw Error("mlp_forward: train mode with dropout needs a random stream");
      const double keep_scale = 1.0 / (1.0 - layer.dropout);
      mask = Matrix(a.rows, a.cols);
      for (std::size_t i = 0; i < a.data.size(); ++i) {
        mask.data[i] = dropout_rng->uniform() < layer.dropout ? 0.0 : keep_scale;
        a.data[i] *= mask.data[i];
      }
    }
    if (cache) {
      cache->inputs.push_back(std::move(x));
      cache->pre.push_back(std::move(z));
      cache->masks.push_back(std::move(mask));
    }
    x = std::move(a);
  }
  return x;
}

double mse_loss(const Matrix& output, const Matrix& targets) {
  if (output.rows != targets.rows || output.cols != targets.cols) throw Error("mse_loss: shape mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < output.data.size(); ++i) {
    const double d = output.data[i] - targets.data[i];
    s += d * d;
  }
  return s / static_cast<double>(output.data.size());
}

Gradients mlp_backward(const MlpModel& model, const ForwardCache& cache, const Matrix& output,
                       const Matrix& targets) {
  const std::size_t L = model.layers.size();
  if (cache.inputs.size() != L) throw Error("mlp_backward: cache does not match model");
  if (output.rows != targets.rows || output.cols != targets.cols)
    throw Error("mlp_backward: target shape mismatch");

  Gradients g;
  g.weights.resize(L);
  g.bias.resize(L);
  g.loss = mse_loss(output, targets);

  const double scale = 2.0 / static_cast<double>(output.data.size());
  Matrix delta(output.rows, output.cols);
  for (std::size_t i = 0; i < delta.data.size(); ++i) delta.data[i] = scale * (output.data[i] - targets.data[i]);

  for (std::size_t l = L; l-- > 0;) {
    const auto& layer = model.layers[l];
    // delta holds dLoss/d(layer output); push it through dropout and ReLU.
    const auto& mask = cache.masks[l];
    if (!mask.data.empty())
      for (std::size_t i = 0; i < delta.data.size(); ++i) delta.data[i] *= mask.data[i];
    if (layer.relu) {
      const auto& pre = cache.pre[l];
      for (std::size_t i = 0; i < delta.data.size(); ++i)
        if (!(pre.data[i] > 0.0)) delta.data[i] = 0.0;
    }
    kernels::gemm_tn(cache.inputs[l], delta, g.weights[l]);
    g.bias[l].assign(layer.fan_out(), 0.0);
    kernels::column_sums(delta, g.bias[l]);
    if (l > 0) {
      Matrix prev;
      kernels::gemm_nt(delta, layer.weights, prev);
      delta = std::move(prev);
    }
  }
  return g;
}

// ---------------------------------------------------------------------------
// Adam

AdamState adam_init(const AdamConfig& config, const std::vector<std::span<double>>& params) {
  AdamState s;
  s.config = config;
  for (const auto& p : params) {
    s.m.emplace_back(p.size(), 0.0);
    s.v.emplace_back(p.size(), 0.0);
  }
  return s;
}

void adam_step(AdamState& state, const std::vector<std::span<double>>& params,
               const std::vector<std::span<const double>>& grads) {
  if (params.size() != grads.size() || params.size() != state.m.size())
    throw Error("adam_step: parameter groups do not match");
  ++state.step;
  const auto& c = state.config;
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));
  for (std::size_t g = 0; g < params.size(); ++g) {
    auto p = params[g];
    auto d = grads[g];
    auto& m = state.m[g];
    auto& v = state.v[g];
    if (p.size() != d.size() || p.size() != m.size()) throw Error("adam_step: shape mismatch");
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * d[i];
      v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * d[i] * d[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      p[i] -= c.lr * mhat / (std::sqrt(vhat) + c.eps);
    }
  }
}

// ---------------------------------------------------------------------------
// Training

namespace {

void gather(const std::vector<float>& src, std::size_t dim, std::span<const std::size_t> rows,
            const MinMaxStats& norm, Matrix& out) {
  out.resize(rows.size(), dim);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const float* s = src.data() + rows[r] * dim;
    double* d = out.data.data() + r * dim;
    for (std::size_t j = 0; j < dim; ++j) d[j] = norm.apply(j, static_cast<double>(s[j]));
  }
}

double evaluate_loss(const MlpModel& model, const TrainingDataset& data, std::span<const std::size_t> rows) {
  constexpr std::size_t kChunk = 1024;
  double total = 0.0;
  Matrix x, t;
  for (std::size_t start = 0; start < rows.size(); start += kChunk) {
    const auto chunk = rows.subspan(start, std::min(kChunk, rows.size() - start));
    gather(data.inputs, data.input_dim, chunk, model.input_norm, x);
    gather(data.targets, data.target_dim, chunk, model.target_norm, t);
    const Matrix y = mlp_forward(model, x, Mode::Infer);
    total += mse_loss(y, t) * static_cast<double>(chunk.size());
  }
  return total / static_cast<double>(rows.size());
}

}  // namespace

TrainHistory train(MlpModel& model, const TrainingDataset& data, const TrainOptions& options) {
  if (data.input_dim != model.input_dim() || data.target_dim != model.output_dim())
    throw Error("train: dataset dimensions do not match the model");
  if (options.epochs < 0 || options.batch_size < 1) throw Error("train: invalid epochs or batch size");
  if (!(options.val_fraction >= 0.0 && options.val_fraction < 1.0)) throw Error("train: val_fraction must be in [0, 1)");

  const std::size_t n = data.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng split_rng(derive_seed(options.seed, {hash_name("split")}));
  split_rng.shuffle(order);
  const auto n_val = static_cast<std::size_t>(std::llround(options.val_fraction * static_cast<double>(n)));
  std::vector<std::size_t> val(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
  std::vector<std::size_t> trn(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
  if (trn.size() < 2) throw Error("train: training split needs at least two samples");

  model.input_norm = minmax_fit<float>(data.inputs, data.input_dim, trn);
  model.target_norm = minmax_fit<float>(data.targets, data.target_dim, trn);
  model.train_seed = options.seed;
  model.dataset_fingerprint = data.fingerprint();

  const auto params = model.parameters();
  AdamState adam = adam_init(options.adam, params);
  const std::span<const std::size_t> val_rows = val.empty() ? std::span<const std::size_t>(trn) : val;

  TrainHistory history;
  history.initial_val_loss = evaluate_loss(model, data, val_rows);

  Matrix x, t;
  ForwardCache cache;
  const auto bs = static_cast<std::size_t>(options.batch_size);
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    Rng epoch_rng(derive_seed(options.seed, {hash_name("epoch"), static_cast<std::uint64_t>(epoch)}));
    Rng dropout_rng(derive_seed(options.seed, {hash_name("dropout"), static_cast<std::uint64_t>(epoch)}));
    epoch_rng.shuffle(trn);
    double total = 0.0;
    for (std::size_t start = 0; start < trn.size(); start += bs) {
      const auto rows = std::span<const std::size_t>(trn).subspan(start, std::min(bs, trn.size() - start));
      gather(data.inputs, data.input_dim, rows, model.input_norm, x);
      gather(data.targets, data.target_dim, rows, model.target_norm, t);
      const Matrix y = mlp_forward(model, x, Mode::Train, &dropout_rng, &cache);
      const Gradients g = mlp_backward(model, cache, y, t);
      if (!std::isfinite(g.loss)) {
        history.train_loss.push_back(g.loss);
        throw TrainingDiverged("train: non-finite loss in epoch " + std::to_string(epoch), history);
      }
      total += g.loss * static_cast<double>(rows.size());
      adam_step(adam, params, g.views());
    }
    history.train_loss.push_back(total / static_cast<double>(trn.size()));
    history.val_loss.push_back(evaluate_loss(model, data, val_rows));
    if (!std::isfinite(history.val_loss.back()))
      throw TrainingDiverged("train: non-finite validation loss in epoch " + std::to_string(epoch), history);
  }
  return history;
}

// ---------------------------------------------------------------------------
// Inference

CovarianceMatrix predict_covariance(const MlpModel& model, const CovarianceMatrix& input) {
  switch (model.variant) {
    case Variant::Hybrid:
      if (input.role != CovRole::Smoothed && input.role != CovRole::SmoothedFailed)
        throw Error("predict_covariance: hybrid model expects a smoothed covariance, got " +
                    std::string(to_string(input.role)));
      break;
    case Variant::DataDriven:
      if (input.role != CovRole::Full && input.role != CovRole::Failed)
        throw Error("predict_covariance: data-driven model expects a physical covariance, got " +
                    std::string(to_string(input.role)));
      break;
    case Variant::Custom: break;
  }
  std::vector<double> features = flatten_features(input);
  if (features.size() != model.input_dim()) throw Error("predict_covariance: input dimension mismatch");
  if (!model.input_norm.empty()) model.input_norm.apply(features);
  Matrix x(1, features.size());
  x.data = std::move(features);
  Matrix y = mlp_forward(model, x, Mode::Infer);
  if (!model.target_norm.empty()) model.target_norm.invert(y.data);
  const auto dim = static_cast<int>(std::lround(std::sqrt(static_cast<double>(y.cols) / 2.0)));
  return unflatten_features(y.data, dim, CovRole::Predicted);
}

}  // namespace sdoa
