#pragma once

#include <string_view>
#include <vector>

#include "sparsedoa/geometry.hpp"
#include "sparsedoa/random.hpp"
#include "sparsedoa/types.hpp"

namespace sdoa {

/// K uncorrelated narrow-band sources plus white sensor noise.
struct SourceScene {
  std::vector<double> angles_deg;  // strictly increasing, inside (-90, 90)
  std::vector<double> powers;      // rho_k^2
  double noise_power = 1.0;        // sigma_n^2

  int K() const { return static_cast<int>(angles_deg.size()); }
  void validate() const;

  /// Unit-power sources with sigma_n^2 = 10^(-snr/10), so every source sees `snr_db`.
  static SourceScene equal_power(std::vector<double> angles_deg, double snr_db);
};

double noise_power_for_snr(double snr_db);

/// Sensors x snapshots.
struct SnapshotMatrix {
  CMatrix values;
  int snapshots() const { return static_cast<int>(values.cols()); }
};

enum class CovRole { Full, Failed, Smoothed, SmoothedFailed, Predicted };

std::string_view to_string(CovRole role);

struct CovarianceMatrix {
  CMatrix values;
  CovRole role = CovRole::Full;

  int dim() const { return static_cast<int>(values.rows()); }
};

/// a(theta)_i = exp(j * pi * d_i * sin(theta)), d_i in units of lambda/2.
CMatrix steering_matrix(const std::vector<int>& positions, const std::vector<double>& angles_deg);
CMatrix steering_matrix(const ArrayGeometry& geom, const std::vector<double>& angles_deg);

/// d a(theta) / d theta (theta in radians), column per source.
CMatrix steering_derivative(const std::vector<int>& positions, const std::vector<double>& angles_deg);

/// y(t) = A x(t) + n(t) with CSCG sources and noise (unconditional model).
/// Failed sensors in `geom` are NOT zeroed here; see zero_failed_rows.
SnapshotMatrix simulate_snapshots(const ArrayGeometry& geom, const SourceScene& scene, int snapshots,
                                  Rng& rng);

/// Snapshot-domain failure: rows of failed sensors set to zero.
SnapshotMatrix zero_failed_rows(SnapshotMatrix Y, const std::vector<int>& failed);

/// R = (1/N) sum_t y(t) y(t)^H.
CovarianceMatrix sample_covariance(const SnapshotMatrix& Y);

/// Covariance-domain failure: rows and columns of `failed` set to exactly zero.
CovarianceMatrix inject_failures(CovarianceMatrix R, const std::vector<int>& failed);

/// R = A R_s A^H + sigma^2 I, with no sampling.
CovarianceMatrix analytic_covariance(const ArrayGeometry& geom, const SourceScene& scene);

/// Draws K sorted angles in [lo, hi] with adjacent gaps >= min_gap.
std::vector<double> draw_angles(int K, double lo, double hi, double min_gap, Rng& rng);

}  // namespace sdoa
