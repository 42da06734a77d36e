#pragma once

#include <vector>

#include "sparsedoa/geometry.hpp"
#include "sparsedoa/signal.hpp"

namespace sdoa {

/// Lag-domain signal of the virtual ULA, lags -(M_v-1) .. (M_v-1).
/// Holes carry an exact zero and available == false.
struct CoarraySignal {
  CVector z;
  std::vector<bool> available;
  int M_v = 0;

  cdouble at(int lag) const { return z(lag + M_v - 1); }
  bool has(int lag) const { return available[static_cast<std::size_t>(lag + M_v - 1)]; }
  bool hole_free() const;
};

/// Column-stacking vec(): entry (i, j) lands at j * M + i.
CVector vectorize_covariance(const CovarianceMatrix& R);

/// Averages R(m, n) over all surviving ordered pairs with d_m - d_n == lag.
/// M_v always comes from the failure-free geometry so the length is fixed.
CoarraySignal redundancy_average(const CovarianceMatrix& R, const ArrayGeometry& geom);

/// R_ss = (1/M_v) sum_i r_i r_i^H with windows r_i(k) = z(k - i), i, k = 1..M_v.
/// The ascending windows make R_ss carry the steering a_v = [1, e^{j pi sin}, ...].
CovarianceMatrix spatial_smoothing(const CoarraySignal& z);

/// [Re(vec R); Im(vec R)], length 2 * dim^2.
std::vector<double> flatten_features(const CovarianceMatrix& R);

/// Inverse of flatten_features followed by the Hermitian projection (Z + Z^H) / 2.
CovarianceMatrix unflatten_features(const std::vector<double>& v, int dim, CovRole role = CovRole::Predicted);

/// Khatri-Rao (column-wise Kronecker) product A (.) B.
CMatrix khatri_rao(const CMatrix& A, const CMatrix& B);

}  // namespace sdoa
