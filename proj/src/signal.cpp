#include "sparsedoa/signal.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sdoa {

void SourceScene::validate() const {
  if (angles_deg.size() != powers.size()) throw Error("scene: angles and powers differ in length");
  for (std::size_t k = 0; k < angles_deg.size(); ++k) {
    if (!(angles_deg[k] > -90.0 && angles_deg[k] < 90.0))
      throw Error("scene: angle outside (-90, 90) degrees");
    if (k > 0 && !(angles_deg[k] > angles_deg[k - 1]))
      throw Error("scene: angles must be strictly increasing");
    if (!(powers[k] >= 0.0)) throw Error("scene: negative source power");
  }
  if (!(noise_power >= 0.0)) throw Error("scene: negative noise power");
}

double noise_power_for_snr(double snr_db) { return std::pow(10.0, -snr_db / 10.0); }

SourceScene SourceScene::equal_power(std::vector<double> angles_deg, double snr_db) {
  SourceScene s;
  s.powers.assign(angles_deg.size(), 1.0);
  s.angles_deg = std::move(angles_deg);
  s.noise_power = noise_power_for_snr(snr_db);
  return s;
}

std::string_view to_string(CovRole role) {
  switch (role) {
    case CovRole::Full: return "full";
    case CovRole::Failed: return "failed";
    case CovRole::Smoothed: return "smoothed";
    case CovRole::SmoothedFailed: return "smoothed-failed";
    case CovRole::Predicted: return "predicted";
  }
  return "unknown";
}

CMatrix steering_matrix(const std::vector<int>& positions, const std::vector<double>& angles_deg) {
  CMatrix A(static_cast<Eigen::Index>(positions.size()), static_cast<Eigen::Index>(angles_deg.size()));
  for (std::size_t k = 0; k < angles_deg.size(); ++k) {
    const double phi = kPi * std::sin(angles_deg[k] * kDegToRad);
    for (std::size_t i = 0; i < positions.size(); ++i)
      A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = std::polar(1.0, phi * positions[i]);
  }
  return A;
}

CMatrix steering_matrix(const ArrayGeometry& geom, const std::vector<double>& angles_deg) {
  return steering_matrix(geom.positions(), angles_deg);
}

CMatrix steering_derivative(const std::vector<int>& positions, const std::vector<double>& angles_deg) {
  CMatrix A = steering_matrix(positions, angles_deg);
  for (std::size_t k = 0; k < angles_deg.size(); ++k) {
    const double dphi = kPi * std::cos(angles_deg[k] * kDegToRad);
    for (std::size_t i = 0; i < positions.size(); ++i)
      A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) *= cdouble(0.0, dphi * positions[i]);
  }
  return A;
}

SnapshotMatrix simulate_snapshots(const ArrayGeometry& geom, const SourceScene& scene, int snapshots,
                                  Rng& rng) {
  if (snapshots < 1) throw Error("simulate_snapshots: need at least one snapshot");
  scene.validate();
  const Eigen::Index M = geom.size();
  const Eigen::Index K = scene.K();
  const CMatrix A = steering_matrix(geom, scene.angles_deg);

  CMatrix X(K, snapshots);
  for (Eigen::Index t = 0; t < snapshots; ++t)
    for (Eigen::Index k = 0; k < K; ++k) X(k, t) = rng.complex_normal(scene.powers[static_cast<std::size_t>(k)]);
  CMatrix noise(M, snapshots);
  for (Eigen::Index t = 0; t < snapshots; ++t)
    for (Eigen::Index i = 0; i < M; ++i) noise(i, t) = rng.complex_normal(scene.noise_power);

  SnapshotMatrix Y;
  Y.values = A * X + noise;
  return Y;
}

SnapshotMatrix zero_failed_rows(SnapshotMatrix Y, const std::vector<int>& failed) {
  for (int f : failed) {
    if (f < 0 || f >= Y.values.rows()) throw Error("zero_failed_rows: sensor index out of range");
    Y.values.row(f).setZero();
  }
  return Y;
}

CovarianceMatrix sample_covariance(const SnapshotMatrix& Y) {
  if (Y.snapshots() < 1) throw Error("sample_covariance: need at least one snapshot");
  CovarianceMatrix R;
  R.values = (Y.values * Y.values.adjoint()) / static_cast<double>(Y.snapshots());
  // Exact Hermitian symmetry and a real diagonal, independent of GEMM rounding.
  R.values = (0.5 * (R.values + R.values.adjoint())).eval();
  R.role = CovRole::Full;
  return R;
}

CovarianceMatrix inject_failures(CovarianceMatrix R, const std::vector<int>& failed) {
  for (int f : failed) {
    if (f < 0 || f >= R.dim())
      throw Error("inject_failures: sensor index " + std::to_string(f) + " out of range");
    R.values.row(f).setZero();
    R.values.col(f).setZero();
  }
  R.role = CovRole::Failed;
  return R;
}

CovarianceMatrix analytic_covariance(const ArrayGeometry& geom, const SourceScene& scene) {
  scene.validate();
  const Eigen::Index M = geom.size();
  CovarianceMatrix R;
  R.values = scene.noise_power * CMatrix::Identity(M, M);
  if (scene.K() > 0) {
    const CMatrix A = steering_matrix(geom, scene.angles_deg);
    Eigen::VectorXd p = Eigen::Map<const Eigen::VectorXd>(scene.powers.data(), scene.K());
    R.values += A * p.cast<cdouble>().asDiagonal() * A.adjoint();
  }
  R.role = CovRole::Full;
  return R;
}

std::vector<double> draw_angles(int K, double lo, double hi, double min_gap, Rng& rng) {
  if (K < 1) throw Error("draw_angles: K must be positive");
  const double slack = (hi - lo) - (K - 1) * min_gap;
  if (slack < 0.0) throw Error("draw_angles: infeasible angle constraints (K too large for range and gap)");
  // Order statistics of K uniforms on [lo, lo + slack], spread by i * min_gap.
  std::vector<double> u(static_cast<std::size_t>(K));
  for (auto& x : u) x = rng.uniform(0.0, slack);
  std::sort(u.begin(), u.end());
  for (int i = 0; i < K; ++i) u[static_cast<std::size_t>(i)] += lo + i * min_gap;
  return u;
}

}  // namespace sdoa
