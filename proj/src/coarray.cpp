#include "sparsedoa/coarray.hpp"

#include <algorithm>
#include <string>

namespace sdoa {

bool CoarraySignal::hole_free() const {
  return std::all_of(available.begin(), available.end(), [](bool a) { return a; });
}

CVector vectorize_covariance(const CovarianceMatrix& R) {
  // Eigen storage is column-major, so the raw buffer is already vec(R).
  return Eigen::Map<const CVector>(R.values.data(), R.values.size());
}

CoarraySignal redundancy_average(const CovarianceMatrix& R, const ArrayGeometry& geom) {
  if (R.dim() != geom.size()) throw Error("redundancy_average: covariance and geometry sizes differ");
  const int M_v = difference_coarray(geom.without_failures()).M_v;
  const int len = 2 * M_v - 1;
  CoarraySignal out;
  out.M_v = M_v;
  out.z = CVector::Zero(len);
  out.available.assign(static_cast<std::size_t>(len), false);
  std::vector<int> count(static_cast<std::size_t>(len), 0);

  const auto& pos = geom.positions();
  for (int m = 0; m < geom.size(); ++m) {
    if (geom.is_failed(m)) continue;
    for (int n = 0; n < geom.size(); ++n) {
      if (geom.is_failed(n)) continue;
      const int lag = pos[static_cast<std::size_t>(m)] - pos[static_cast<std::size_t>(n)];
      if (lag <= -M_v || lag >= M_v) continue;
      const int idx = lag + M_v - 1;
      out.z(idx) += R.values(m, n);
      ++count[static_cast<std::size_t>(idx)];
    }
  }
  for (int idx = 0; idx < len; ++idx) {
    if (count[static_cast<std::size_t>(idx)] > 0) {
      out.z(idx) /= static_cast<double>(count[static_cast<std::size_t>(idx)]);
      out.available[static_cast<std::size_t>(idx)] = true;
    }
  }
  return out;
}

CovarianceMatrix spatial_smoothing(const CoarraySignal& z) {
  const Eigen::Index len = z.z.size();
  if (len % 2 == 0) throw Error("spatial_smoothing: lag vector length must be odd");
  const Eigen::Index M_v = (len + 1) / 2;
  // Window i (0-based) holds lags k - i for k = 0..M_v-1, i.e. z.z segment
  // starting at index M_v - 1 - i.
  CMatrix acc = CMatrix::Zero(M_v, M_v);
  for (Eigen::Index i = 0; i < M_v; ++i) {
    const auto r = z.z.segment(M_v - 1 - i, M_v);
    acc.noalias() += r * r.adjoint();
  }
  CovarianceMatrix out;
  out.values = acc / static_cast<double>(M_v);
  out.role = z.hole_free() ? CovRole::Smoothed : CovRole::SmoothedFailed;
  return out;
}

std::vector<double> flatten_features(const CovarianceMatrix& R) {
  const CVector v = vectorize_covariance(R);
  const auto n = static_cast<std::size_t>(v.size());
  std::vector<double> out(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = v(static_cast<Eigen::Index>(i)).real();
    out[n + i] = v(static_cast<Eigen::Index>(i)).imag();
  }
  return out;
}

CovarianceMatrix unflatten_features(const std::vector<double>& v, int dim, CovRole role) {
  const auto n = static_cast<std::size_t>(dim) * static_cast<std::size_t>(dim);
  if (dim < 1 || v.size() != 2 * n)
    throw Error("unflatten_features: expected " + std::to_string(2 * n) + " features, got " +
                std::to_string(v.size()));
  CMatrix Z(dim, dim);
  for (std::size_t i = 0; i < n; ++i) Z.data()[i] = cdouble(v[i], v[n + i]);
  CovarianceMatrix out;
  out.values = (0.5 * (Z + Z.adjoint())).eval();
  out.role = role;
  return out;
}

CMatrix khatri_rao(const CMatrix& A, const CMatrix& B) {
  if (A.cols() != B.cols()) throw Error("khatri_rao: column counts differ");
  CMatrix out(A.rows() * B.rows(), A.cols());
  for (Eigen::Index k = 0; k < A.cols(); ++k)
    for (Eigen::Index i = 0; i < A.rows(); ++i)
      out.col(k).segment(i * B.rows(), B.rows()) = A(i, k) * B.col(k);
  return out;
}

}  // namespace sdoa
