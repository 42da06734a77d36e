#pragma once

#include <vector>

#include "sparsedoa/geometry.hpp"
#include "sparsedoa/signal.hpp"

namespace sdoa {

struct EigenDecomposition {
  Eigen::VectorXd values;  // ascending
  CMatrix vectors;         // columns match `values`
};

/// Throws if R deviates from Hermitian by more than 1e-8 relative (Frobenius).
EigenDecomposition hermitian_eig(const CMatrix& R);

struct MusicSpectrum {
  std::vector<double> grid_deg;
  std::vector<double> values;
  int K = 0;
};

/// Default angular grid step in degrees.
inline constexpr double kDefaultGridStep = 0.05;

/// Uniform grid -90 + i * step covering [-90, 90).
std::vector<double> angle_grid(double step_deg);

/// P(theta) = 1 / ||E_n^H a(theta)||^2 with E_n spanning the dim - K smallest
/// eigenvectors. `positions` are the sensor (or virtual ULA) positions in d0.
MusicSpectrum music_spectrum(const CovarianceMatrix& R, int K, double grid_step_deg,
                             const std::vector<int>& positions);

/// Positions 0..M_v-1 of the virtual ULA seen by a smoothed covariance.
std::vector<int> virtual_ula(int M_v);

struct PeakPick {
  std::vector<double> angles_deg;  // ascending
  bool resolution_failure = false;  // fewer than K local maxima
};

/// Top-K interior local maxima by value, returned sorted by angle. Missing
/// peaks are padded with the largest remaining grid values.
PeakPick pick_peaks(const MusicSpectrum& spec, int K);

/// (1/KQ) sum_q sum_k (est - truth)^2, pairing sorted estimates with sorted truths.
double doa_mse(const std::vector<std::vector<double>>& estimates,
               const std::vector<std::vector<double>>& truths);

struct CrbResult {
  Eigen::MatrixXd rad2;  // K x K, radians^2
  Eigen::MatrixXd deg2() const { return rad2 * (kRadToDeg * kRadToDeg); }
  /// Mean per-angle bound in degrees^2, comparable with doa_mse.
  double mean_deg2() const { return rad2.trace() / static_cast<double>(rad2.rows()) * kRadToDeg * kRadToDeg; }
};

/// Coarray-model stochastic CRB on the source angles for N snapshots,
/// evaluated over the active sensors of `geom`.
CrbResult crb(const ArrayGeometry& geom, const SourceScene& scene, int snapshots);

}  // namespace sdoa
