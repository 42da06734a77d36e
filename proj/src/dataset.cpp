#include <algorithm>
#include <cstdio>
#include <cstring>

#include "sparsedoa/coarray.hpp"
#include "sparsedoa/neural.hpp"

namespace sdoa {

std::vector<int> FailurePolicy::draw(int M, Rng& rng) const {
  const int lo = include_zero ? 0 : min_failures;
  if (lo < 0 || max_failures < lo || max_failures >= M) throw Error("failure policy: invalid failure count range");
  const int count = lo + static_cast<int>(rng.index(static_cast<std::size_t>(max_failures - lo + 1)));
  std::vector<int> idx(static_cast<std::size_t>(M));
  for (int i = 0; i < M; ++i) idx[static_cast<std::size_t>(i)] = i;
  // Partial Fisher-Yates: the first `count` entries are a uniform draw without replacement.
  for (int i = 0; i < count; ++i) {
    const auto j = static_cast<std::size_t>(i) + rng.index(static_cast<std::size_t>(M - i));
    std::swap(idx[static_cast<std::size_t>(i)], idx[j]);
  }
  std::vector<int> out(idx.begin(), idx.begin() + count);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<double> model_input(Variant variant, const CovarianceMatrix& R_full, const ArrayGeometry& geom,
                                const std::vector<int>& failed) {
  const CovarianceMatrix R_m = inject_failures(R_full, failed);
  switch (variant) {
    case Variant::Hybrid:
      return flatten_features(spatial_smoothing(redundancy_average(R_m, geom.with_failures(failed))));
    case Variant::DataDriven:
      return flatten_features(R_m);
    case Variant::Custom: break;
  }
  throw Error("model_input: custom models have no defined input features");
}

std::vector<double> model_target(const CovarianceMatrix& R_full, const ArrayGeometry& geom) {
  return flatten_features(spatial_smoothing(redundancy_average(R_full, geom.without_failures())));
}

std::string TrainingDataset::fingerprint() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const std::vector<float>& v) {
    const auto* bytes = reinterpret_cast<const unsigned char*>(v.data());
    for (std::size_t i = 0; i < v.size() * sizeof(float); ++i) {
      h ^= bytes[i];
      h *= 0x100000001b3ULL;
    }
  };
  mix(inputs);
  mix(targets);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

TrainingDataset generate_dataset(const DatasetSpec& spec) {
  if (spec.variant == Variant::Custom) throw Error("generate_dataset: variant must be hybrid or data-driven");
  if (spec.samples < 1) throw Error("generate_dataset: need at least one sample");
  const ArrayGeometry geom(spec.positions);
  // Fails early on infeasible angle constraints.
  {
    Rng probe(0);
    (void)draw_angles(spec.sources, spec.angle_lo, spec.angle_hi, spec.min_gap, probe);
    (void)spec.failures.draw(geom.size(), probe);
  }
  const int M = geom.size();
  const int M_v = difference_coarray(geom).M_v;

  TrainingDataset data;
  data.spec = spec;
  data.input_dim = static_cast<std::size_t>(spec.variant == Variant::Hybrid ? 2 * M_v * M_v : 2 * M * M);
  data.target_dim = static_cast<std::size_t>(2 * M_v * M_v);
  const auto P = static_cast<std::size_t>(spec.samples);
  data.inputs.resize(P * data.input_dim);
  data.targets.resize(P * data.target_dim);

  const auto total = static_cast<long long>(P);
#pragma omp parallel for schedule(dynamic, 16)
  for (long long s = 0; s < total; ++s) {
    Rng rng(derive_seed(spec.seed, {static_cast<std::uint64_t>(s)}));
    const auto angles = draw_angles(spec.sources, spec.angle_lo, spec.angle_hi, spec.min_gap, rng);
    const double snr = rng.uniform(spec.snr_lo, spec.snr_hi);
    const auto scene = SourceScene::equal_power(angles, snr);
    const auto R = sample_covariance(simulate_snapshots(geom, scene, spec.snapshots, rng));
    const auto failed = spec.failures.draw(M, rng);
    const auto x = model_input(spec.variant, R, geom, failed);
    const auto t = model_target(R, geom);
    std::transform(x.begin(), x.end(), data.inputs.begin() + static_cast<std::ptrdiff_t>(s) * static_cast<std::ptrdiff_t>(data.input_dim),
                   [](double v) { return static_cast<float>(v); });
    std::transform(t.begin(), t.end(), data.targets.begin() + static_cast<std::ptrdiff_t>(s) * static_cast<std::ptrdiff_t>(data.target_dim),
                   [](double v) { return static_cast<float>(v); });
  }
  return data;
}

}  // namespace sdoa
