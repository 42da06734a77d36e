#include <omp.h>

#include <cstring>

#include "doctest.h"
#include "sparsedoa/kernels.hpp"
#include "sparsedoa/random.hpp"

using namespace sdoa;
using kernels::Matrix;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, Rng& rng) {
  Matrix m(r, c);
  for (auto& x : m.data) x = rng.uniform(-1.0, 1.0);
  return m;
}

// Plain triple loop, accumulated in long double.
Matrix naive(const Matrix& A, bool ta, const Matrix& B, bool tb) {
  const std::size_t n = ta ? A.cols : A.rows, k = ta ? A.rows : A.cols, m = tb ? B.rows : B.cols;
  Matrix C(n, m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      long double s = 0;
      for (std::size_t p = 0; p < k; ++p) s += (ta ? A(p, i) : A(i, p)) * (tb ? B(j, p) : B(p, j));
      C(i, j) = static_cast<double>(s);
    }
  return C;
}

bool bit_equal(const Matrix& a, const Matrix& b) {
  return a.rows == b.rows && a.cols == b.cols &&
         std::memcmp(a.data.data(), b.data.data(), a.data.size() * sizeof(double)) == 0;
}

double max_diff(const Matrix& a, const Matrix& b) {
  double d = 0;
  for (std::size_t i = 0; i < a.data.size(); ++i) d = std::max(d, std::abs(a.data[i] - b.data[i]));
  return d;
}

}  // namespace

TEST_CASE("serial gemm matches a naive triple loop") {
  Rng rng(3);
  for (auto [n, k, m] : {std::tuple{1, 1, 1}, {3, 5, 2}, {17, 9, 33}, {64, 70, 5}}) {
    const auto A = random_matrix(n, k, rng), B = random_matrix(k, m, rng);
    const auto At = kernels::transpose(A), Bt = kernels::transpose(B);
    Matrix C;
    kernels::serial::gemm_nn(A, B, C);
    CHECK(max_diff(C, naive(A, false, B, false)) < 1e-12);
    kernels::serial::gemm_tn(At, B, C);
    CHECK(max_diff(C, naive(At, true, B, false)) < 1e-12);
    kernels::serial::gemm_nt(A, Bt, C);
    CHECK(max_diff(C, naive(A, false, Bt, true)) < 1e-12);
  }
}

TEST_CASE("parallel gemm is bit-identical to serial for any thread count") {
  Rng rng(9);
  const auto A = random_matrix(123, 77, rng), B = random_matrix(77, 41, rng);
  const auto At = kernels::transpose(A), Bt = kernels::transpose(B);
  Matrix nn, tn, nt;
  kernels::serial::gemm_nn(A, B, nn);
  kernels::serial::gemm_tn(At, B, tn);
  kernels::serial::gemm_nt(A, Bt, nt);
  const int saved = omp_get_max_threads();
  for (int threads : {1, 3, 4}) {
    omp_set_num_threads(threads);
    Matrix C;
    kernels::parallel::gemm_nn(A, B, C);
    CHECK(bit_equal(C, nn));
    kernels::parallel::gemm_tn(At, B, C);
    CHECK(bit_equal(C, tn));
    kernels::parallel::gemm_nt(A, Bt, C);
    CHECK(bit_equal(C, nt));
  }
  omp_set_num_threads(saved);
}

TEST_CASE("gemm rejects mismatched shapes") {
  Matrix A(2, 3), B(4, 2), C;
  CHECK_THROWS(kernels::serial::gemm_nn(A, B, C));
  CHECK_THROWS(kernels::parallel::gemm_nn(A, B, C));
  CHECK_THROWS(kernels::serial::gemm_tn(A, B, C));
  CHECK_THROWS(kernels::serial::gemm_nt(A, B, C));
}

TEST_CASE("row helpers") {
  Matrix C(2, 3, 1.0);
  const std::vector<double> b{1.0, 2.0, 3.0};
  kernels::add_row_vector(C, b);
  CHECK(C(1, 2) == 4.0);
  std::vector<double> s(3);
  kernels::column_sums(C, s);
  CHECK(s == std::vector<double>{4.0, 6.0, 8.0});
  const auto T = kernels::transpose(C);
  CHECK(T.rows == 3);
  CHECK(T(2, 1) == 4.0);
}
