#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "sparsedoa/coarray.hpp"
#include "sparsedoa/spectral.hpp"
#include "test_helpers.hpp"

using namespace sdoa;

namespace {

CovarianceMatrix exact_smoothed(const ArrayGeometry& g, const SourceScene& s) {
  return spatial_smoothing(redundancy_average(analytic_covariance(g, s), g));
}

// Number of true angles with a picked peak within `tol` degrees.
int resolved(const std::vector<double>& est, const std::vector<double>& truth, double tol) {
  int n = 0;
  for (double t : truth)
    if (std::any_of(est.begin(), est.end(), [&](double e) { return std::abs(e - t) <= tol; })) ++n;
  return n;
}

}  // namespace

TEST_CASE("hermitian_eig examples") {
  CMatrix D = CMatrix::Zero(3, 3);
  D(0, 0) = 1.0;
  D(1, 1) = 2.0;
  D(2, 2) = 3.0;
  const auto e = hermitian_eig(D);
  CHECK(e.values(0) == doctest::Approx(1.0));
  CHECK(e.values(1) == doctest::Approx(2.0));
  CHECK(e.values(2) == doctest::Approx(3.0));
  CHECK((e.vectors.cwiseAbs() - Eigen::MatrixXd::Identity(3, 3)).norm() < 1e-12);

  const auto s = hermitian_eig(0.4 * CMatrix::Identity(5, 5));
  for (int i = 0; i < 5; ++i) CHECK(s.values(i) == doctest::Approx(0.4));

  Rng rng(1);
  const CMatrix R = test::random_hermitian(6, rng);
  const auto r = hermitian_eig(R);
  const CMatrix recon = r.vectors * r.values.cast<cdouble>().asDiagonal() * r.vectors.adjoint();
  CHECK((recon - R).norm() < 1e-8 * R.norm());
  CHECK((r.vectors.adjoint() * r.vectors - CMatrix::Identity(6, 6)).norm() < 1e-8);
  for (int i = 1; i < 6; ++i) CHECK(r.values(i) >= r.values(i - 1));

  CMatrix bad = R;
  bad(0, 1) += 1.0;
  CHECK_THROWS_AS(hermitian_eig(bad), Error);
}

TEST_CASE("angle grid") {
  const auto g = angle_grid(0.05);
  CHECK(g.size() == 3600);
  CHECK(g.front() == -90.0);
  CHECK(g.back() < 90.0);
  CHECK(angle_grid(0.1).size() == 1800);
}

TEST_CASE("MUSIC peaks at a single noiseless source") {
  const auto g = mra_lookup(5);
  const auto R = exact_smoothed(g, {{20.0}, {1.0}, 0.1});
  const auto spec = music_spectrum(R, 1, 0.1, virtual_ula(10));
  const auto it = std::max_element(spec.values.begin(), spec.values.end());
  CHECK(spec.grid_deg[static_cast<std::size_t>(it - spec.values.begin())] == doctest::Approx(20.0).epsilon(1e-12));
  for (double v : spec.values) CHECK(v >= 0.0);
}

TEST_CASE("MUSIC with K = dim - 1") {
  const auto g = mra_lookup(4);  // M_v = 7
  std::vector<double> angles{-60, -40, -20, 0, 20, 40};
  const auto R = exact_smoothed(g, SourceScene::equal_power(angles, 10.0));
  const auto spec = music_spectrum(R, 6, 0.05, virtual_ula(7));
  for (double v : spec.values) CHECK(std::isfinite(v));
  const auto pk = pick_peaks(spec, 6);
  CHECK_FALSE(pk.resolution_failure);
  for (std::size_t k = 0; k < 6; ++k) CHECK(std::abs(pk.angles_deg[k] - angles[k]) <= 0.05 + 1e-9);
  CHECK_THROWS_AS(music_spectrum(R, 7, 0.05, virtual_ula(7)), Error);
  CHECK_THROWS_AS(music_spectrum(R, 0, 0.05, virtual_ula(7)), Error);
}

TEST_CASE("exact SS-MUSIC recovers K = 1..9 sources on the 5-sensor MRA") {
  const auto g = mra_lookup(5);
  for (int K = 1; K <= 9; ++K) {
    std::vector<double> angles;
    for (int k = 0; k < K; ++k) angles.push_back(std::round(-60.0 + 120.0 * k / std::max(1, K - 1) + 0.37 * K));
    if (K == 1) angles = {13.0};
    const auto R = exact_smoothed(g, SourceScene::equal_power(angles, 10.0));
    const auto pk = pick_peaks(music_spectrum(R, K, 0.05, virtual_ula(10)), K);
    for (int k = 0; k < K; ++k)
      CHECK(std::abs(pk.angles_deg[static_cast<std::size_t>(k)] - angles[static_cast<std::size_t>(k)]) <= 0.05 + 1e-9);
  }
}

TEST_CASE("MUSIC peak locations are scale invariant") {
  const auto g = mra_lookup(5);
  Rng rng(12);
  const auto R = sample_covariance(simulate_snapshots(g, SourceScene::equal_power({15.0, 33.0, 52.0}, 0.0), 200, rng));
  const auto Rss = spatial_smoothing(redundancy_average(R, g));
  const auto base = pick_peaks(music_spectrum(Rss, 3, 0.05, virtual_ula(10)), 3).angles_deg;
  for (double c : {1e-3, 0.5, 7.0, 1e4}) {
    CovarianceMatrix scaled{c * Rss.values, Rss.role};
    CHECK(pick_peaks(music_spectrum(scaled, 3, 0.05, virtual_ula(10)), 3).angles_deg == base);
  }
}

TEST_CASE("pick_peaks on synthetic spectra") {
  MusicSpectrum two;
  for (int i = 0; i < 200; ++i) {
    const double a = -90.0 + i;
    two.grid_deg.push_back(a);
    two.values.push_back(std::exp(-0.5 * (a + 30) * (a + 30) / 4.0) + 2.0 * std::exp(-0.5 * (a - 45) * (a - 45) / 9.0));
  }
  const auto p2 = pick_peaks(two, 2);
  CHECK_FALSE(p2.resolution_failure);
  CHECK(p2.angles_deg == std::vector<double>{-30.0, 45.0});

  MusicSpectrum mono;
  for (int i = 0; i < 50; ++i) {
    mono.grid_deg.push_back(i);
    mono.values.push_back(i);
  }
  const auto p1 = pick_peaks(mono, 1);
  CHECK(p1.resolution_failure);
  CHECK(p1.angles_deg == std::vector<double>{49.0});

  const auto g = mra_lookup(5);
  const std::vector<double> truth{-21.3, 8.0, 36.6};
  const auto p3 = pick_peaks(music_spectrum(exact_smoothed(g, SourceScene::equal_power(truth, 5.0)), 3, 0.05, virtual_ula(10)), 3);
  for (int k = 0; k < 3; ++k) CHECK(std::abs(p3.angles_deg[static_cast<std::size_t>(k)] - truth[static_cast<std::size_t>(k)]) <= 0.05);
}

TEST_CASE("unrepaired failures break the 9-source scene at -10 dB") {
  const auto g = mra_lookup(10);
  const std::vector<int> failed{0, 4};
  Rng rng(2024);
  const auto angles = draw_angles(9, 10.0, 70.0, 5.0, rng);
  const auto R = sample_covariance(simulate_snapshots(g, SourceScene::equal_power(angles, -10.0), 200, rng));
  const auto Rsm = spatial_smoothing(redundancy_average(inject_failures(R, failed), g.with_failures(failed)));
  CHECK(Rsm.role == CovRole::SmoothedFailed);
  const auto pk = pick_peaks(music_spectrum(Rsm, 9, 0.05, virtual_ula(36)), 9);
  CHECK(resolved(pk.angles_deg, angles, 1.0) < 9);
}

TEST_CASE("doa_mse") {
  CHECK(doa_mse({{1.0, 2.0}}, {{1.0, 2.0}}) == 0.0);
  CHECK(doa_mse({{12.0}}, {{10.0}}) == doctest::Approx(4.0));
  CHECK(doa_mse({{11.0, 21.0}, {33.0, 41.0}}, {{10.0, 20.0}, {30.0, 40.0}}) == doctest::Approx(3.0));
  CHECK_THROWS_AS(doa_mse({{1.0}}, {{1.0, 2.0}}), Error);
  CHECK_THROWS_AS(doa_mse({{1.0}}, {}), Error);

  Rng rng(7);
  for (int t = 0; t < 50; ++t) {
    std::vector<std::vector<double>> est, truth;
    for (int q = 0; q < 3; ++q) {
      auto tr = draw_angles(4, 10, 70, 5, rng);
      std::vector<double> e;
      for (double a : tr) e.push_back(a + rng.uniform(-1.0, 1.0));
      truth.push_back(tr);
      est.push_back(e);
    }
    const double ref = doa_mse(est, truth);
    for (auto& e : est) rng.shuffle(e);
    CHECK(doa_mse(est, truth) == ref);
  }
}

TEST_CASE("CRB scales as 1/N and is symmetric PSD") {
  const auto g = mra_lookup(5);
  const auto s = SourceScene::equal_power({12.0, 30.0, 55.0}, 0.0);
  const auto a = crb(g, s, 200).rad2;
  const auto b = crb(g, s, 400).rad2;
  for (int k = 0; k < 3; ++k) CHECK(std::abs(b(k, k) - 0.5 * a(k, k)) <= 1e-10 * a(k, k));
  CHECK((a - a.transpose()).norm() == 0.0);
  CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(a).eigenvalues().minCoeff() >= -1e-10 * a.trace());
}

TEST_CASE("CRB matches a finite-difference Fisher information oracle") {
  const auto g = mra_lookup(5);
  const auto s1 = SourceScene::equal_power({25.0}, 0.0);
  const double analytic = crb(g, s1, 200).rad2(0, 0);
  const double oracle = test::fd_crb(g, s1, 200)(0, 0);
  CHECK(std::abs(analytic - oracle) <= 0.01 * oracle);

  const auto s3 = SourceScene::equal_power({-20.0, 10.0, 47.0}, 3.0);
  const auto A3 = crb(g, s3, 100).rad2;
  const auto O3 = test::fd_crb(g, s3, 100);
  CHECK((A3 - O3).norm() <= 0.01 * O3.norm());
}

TEST_CASE("CRB does not decrease with noise power") {
  const auto g = mra_lookup(6);
  SourceScene s{{5.0, 25.0, 44.0, 60.0}, {1.0, 1.0, 1.0, 1.0}, 0.01};
  Eigen::VectorXd prev = crb(g, s, 200).rad2.diagonal();
  for (double sigma2 : {0.03, 0.1, 0.3, 1.0, 3.0, 10.0}) {
    s.noise_power = sigma2;
    const Eigen::VectorXd cur = crb(g, s, 200).rad2.diagonal();
    for (int k = 0; k < 4; ++k) CHECK(cur(k) >= prev(k) * (1.0 - 1e-12));
    prev = cur;
  }
}

TEST_CASE("CRB reports unidentifiable scenes") {
  // Two sensors give only three distinct lags; three sources cannot be identified.
  CHECK_THROWS_AS(crb(ArrayGeometry({0, 1}), SourceScene::equal_power({-30.0, 0.0, 30.0}, 0.0), 100), Error);
  CHECK(crb(mra_lookup(5), SourceScene::equal_power({20.0}, 0.0), 10).mean_deg2() > 0.0);
}
