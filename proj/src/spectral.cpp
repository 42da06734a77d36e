#include "sparsedoa/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "sparsedoa/coarray.hpp"

namespace sdoa {

EigenDecomposition hermitian_eig(const CMatrix& R) {
  if (R.rows() != R.cols()) throw Error("hermitian_eig: matrix is not square");
  const double scale = std::max(R.norm(), std::numeric_limits<double>::min());
  if ((R - R.adjoint()).norm() > 1e-8 * scale) throw Error("hermitian_eig: matrix is not Hermitian");
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(R);
  if (solver.info() != Eigen::Success) throw Error("hermitian_eig: eigensolver did not converge");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

std::vector<double> angle_grid(double step_deg) {
  if (!(step_deg > 0.0)) throw Error("angle_grid: step must be positive");
  const auto n = static_cast<std::size_t>(std::ceil(180.0 / step_deg - 1e-9));
  std::vector<double> grid(n);
  for (std::size_t i = 0; i < n; ++i) grid[i] = -90.0 + static_cast<double>(i) * step_deg;
  return grid;
}

std::vector<int> virtual_ula(int M_v) {
  std::vector<int> p(static_cast<std::size_t>(M_v));
  std::iota(p.begin(), p.end(), 0);
  return p;
}

MusicSpectrum music_spectrum(const CovarianceMatrix& R, int K, double grid_step_deg,
                             const std::vector<int>& positions) {
  const int dim = R.dim();
  if (K < 1 || K >= dim)
    throw Error("music_spectrum: need 1 <= K < dim, got K = " + std::to_string(K) + ", dim = " +
                std::to_string(dim));
  if (static_cast<int>(positions.size()) != dim) throw Error("music_spectrum: positions do not match R");
  const auto eig = hermitian_eig(R.values);
  const CMatrix En = eig.vectors.leftCols(dim - K);

  MusicSpectrum spec;
  spec.K = K;
  spec.grid_deg = angle_grid(grid_step_deg);
  const CMatrix A = steering_matrix(positions, spec.grid_deg);
  const CMatrix proj = En.adjoint() * A;
  spec.values.resize(spec.grid_deg.size());
  for (std::size_t g = 0; g < spec.grid_deg.size(); ++g) {
    const double d = proj.col(static_cast<Eigen::Index>(g)).squaredNorm();
    spec.values[g] = 1.0 / std::max(d, std::numeric_limits<double>::min());
  }
  return spec;
}

PeakPick pick_peaks(const MusicSpectrum& spec, int K) {
  if (K < 1) throw Error("pick_peaks: K must be positive");
  const auto& v = spec.values;
  const std::size_t n = v.size();
  std::vector<std::size_t> maxima;
  std::vector<char> is_max(n, 0);
  // Interior maxima; a plateau counts once, at its left edge.
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (v[i] > v[i - 1] && v[i] >= v[i + 1]) {
      std::size_t j = i;
      while (j + 1 < n && v[j + 1] == v[i]) ++j;
      if (j + 1 < n && v[j + 1] < v[i]) {
        maxima.push_back(i);
        is_max[i] = 1;
      }
    }
  }
  auto by_value = [&](std::size_t a, std::size_t b) { return v[a] != v[b] ? v[a] > v[b] : a < b; };
  std::sort(maxima.begin(), maxima.end(), by_value);

  PeakPick out;
  std::vector<std::size_t> chosen(maxima.begin(),
                                  maxima.begin() + static_cast<std::ptrdiff_t>(std::min<std::size_t>(maxima.size(), K)));
  if (chosen.size() < static_cast<std::size_t>(K)) {
    out.resolution_failure = true;
    std::vector<std::size_t> rest;
    for (std::size_t i = 0; i < n; ++i)
      if (!is_max[i]) rest.push_back(i);
    std::sort(rest.begin(), rest.end(), by_value);
    for (std::size_t i = 0; i < rest.size() && chosen.size() < static_cast<std::size_t>(K); ++i)
      chosen.push_back(rest[i]);
  }
  for (auto i : chosen) out.angles_deg.push_back(spec.grid_deg[i]);
  std::sort(out.angles_deg.begin(), out.angles_deg.end());
  return out;
}

double doa_mse(const std::vector<std::vector<double>>& estimates,
               const std::vector<std::vector<double>>& truths) {
  if (estimates.size() != truths.size() || estimates.empty()) throw Error("doa_mse: shape mismatch");
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t q = 0; q < estimates.size(); ++q) {
    if (estimates[q].size() != truths[q].size() || estimates[q].empty())
      throw Error("doa_mse: shape mismatch in trial " + std::to_string(q));
    auto e = estimates[q];
    auto t = truths[q];
    std::sort(e.begin(), e.end());
    std::sort(t.begin(), t.end());
    for (std::size_t k = 0; k < e.size(); ++k) total += (e[k] - t[k]) * (e[k] - t[k]);
    count += e.size();
  }
  return total / static_cast<double>(count);
}

namespace {

// (R^T kron R)^{-1/2} through its eigendecomposition, eigenvalues floored at 1e-12 * max.
CMatrix kron_inverse_sqrt(const CMatrix& R) {
  const Eigen::Index M = R.rows();
  CMatrix kron(M * M, M * M);
  const CMatrix Rt = R.transpose();
  for (Eigen::Index i = 0; i < M; ++i)
    for (Eigen::Index j = 0; j < M; ++j) kron.block(i * M, j * M, M, M) = Rt(i, j) * R;
  kron = (0.5 * (kron + kron.adjoint())).eval();
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(kron);
  Eigen::VectorXd lam = solver.eigenvalues();
  const double floor = 1e-12 * lam.maxCoeff();
  for (Eigen::Index i = 0; i < lam.size(); ++i) lam(i) = 1.0 / std::sqrt(std::max(lam(i), floor));
  return solver.eigenvectors() * lam.cast<cdouble>().asDiagonal() * solver.eigenvectors().adjoint();
}

}  // namespace

CrbResult crb(const ArrayGeometry& geom, const SourceScene& scene, int snapshots) {
  if (snapshots < 1) throw Error("crb: need at least one snapshot");
  scene.validate();
  const int K = scene.K();
  if (K < 1) throw Error("crb: need at least one source");
  const auto pos = geom.active_positions();
  const auto M = static_cast<Eigen::Index>(pos.size());

  const CMatrix A = steering_matrix(pos, scene.angles_deg);
  const CMatrix dA = steering_derivative(pos, scene.angles_deg);
  Eigen::VectorXd p = Eigen::Map<const Eigen::VectorXd>(scene.powers.data(), K);
  CMatrix R = A * p.cast<cdouble>().asDiagonal() * A.adjoint() +
              scene.noise_power * CMatrix::Identity(M, M);

  const CMatrix W = kron_inverse_sqrt(R);
  const CMatrix Ad = khatri_rao(A.conjugate(), A);
  const CMatrix Ad_dot = khatri_rao(dA.conjugate(), A) + khatri_rao(A.conjugate(), dA);

  // Angle block carries the derivative term; powers and noise are nuisance.
  const CMatrix M_theta = W * Ad_dot * p.cast<cdouble>().asDiagonal();
  CMatrix nuisance(M * M, K + 1);
  nuisance.leftCols(K) = Ad;
  nuisance.col(K) = CMatrix::Identity(M, M).reshaped();
  const CMatrix M_s = W * nuisance;

  const CMatrix gram = M_s.adjoint() * M_s;
  Eigen::SelfAdjointEigenSolver<CMatrix> gram_eig(gram);
  const double gmax = gram_eig.eigenvalues().maxCoeff();
  if (!(gram_eig.eigenvalues().minCoeff() > 1e-12 * gmax))
    throw Error("crb: nuisance block is rank deficient (power/noise parameters not identifiable)");
  const CMatrix proj_part = M_s * gram.ldlt().solve(M_s.adjoint() * M_theta);
  const CMatrix fim_c = M_theta.adjoint() * (M_theta - proj_part);
  Eigen::MatrixXd fim = fim_c.real();
  fim = (0.5 * (fim + fim.transpose())).eval();

  Eigen::LLT<Eigen::MatrixXd> llt(fim);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> fim_eig(fim);
  if (llt.info() != Eigen::Success ||
      !(fim_eig.eigenvalues().minCoeff() > 1e-12 * fim_eig.eigenvalues().maxCoeff()))
    throw Error("crb: Fisher information on the angles is singular (angles not identifiable; K = " +
                std::to_string(K) + ", active sensors = " + std::to_string(M) + ")");
  CrbResult out;
  out.rad2 = llt.solve(Eigen::MatrixXd::Identity(K, K)) / static_cast<double>(snapshots);
  out.rad2 = (0.5 * (out.rad2 + out.rad2.transpose())).eval();
  return out;
}

}  // namespace sdoa
