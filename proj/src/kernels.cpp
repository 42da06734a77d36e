#include "sparsedoa/kernels.hpp"

#include <stdexcept>

namespace sdoa::kernels {

namespace {

inline void axpy(double a, const double* __restrict x, double* __restrict y, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) y[j] += a * x[j];
}

void check(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

// Row i of C = A * B.
inline void nn_row(const Matrix& A, const Matrix& B, Matrix& C, std::size_t i) {
  double* c = C.data.data() + i * C.cols;
  for (std::size_t j = 0; j < C.cols; ++j) c[j] = 0.0;
  const double* a = A.data.data() + i * A.cols;
  for (std::size_t k = 0; k < A.cols; ++k) axpy(a[k], B.data.data() + k * B.cols, c, C.cols);
}

// Row k of C = A^T * B, i.e. sum over b of A(b, k) * B(b, :).
inline void tn_row(const Matrix& A, const Matrix& B, Matrix& C, std::size_t k) {
  double* c = C.data.data() + k * C.cols;
  for (std::size_t j = 0; j < C.cols; ++j) c[j] = 0.0;
  for (std::size_t b = 0; b < A.rows; ++b) axpy(A(b, k), B.data.data() + b * B.cols, c, C.cols);
}

void prepare_nn(const Matrix& A, const Matrix& B, Matrix& C) {
  check(A.cols == B.rows, "gemm_nn: inner dimensions differ");
  if (C.rows != A.rows || C.cols != B.cols) C.resize(A.rows, B.cols);
}

void prepare_tn(const Matrix& A, const Matrix& B, Matrix& C) {
  check(A.rows == B.rows, "gemm_tn: inner dimensions differ");
  if (C.rows != A.cols || C.cols != B.cols) C.resize(A.cols, B.cols);
}

}  // namespace

Matrix transpose(const Matrix& A) {
  Matrix T(A.cols, A.rows);
  for (std::size_t i = 0; i < A.rows; ++i)
    for (std::size_t j = 0; j < A.cols; ++j) T(j, i) = A(i, j);
  return T;
}

namespace serial {

void gemm_nn(const Matrix& A, const Matrix& B, Matrix& C) {
  prepare_nn(A, B, C);
  for (std::size_t i = 0; i < A.rows; ++i) nn_row(A, B, C, i);
}

void gemm_tn(const Matrix& A, const Matrix& B, Matrix& C) {
  prepare_tn(A, B, C);
  for (std::size_t k = 0; k < A.cols; ++k) tn_row(A, B, C, k);
}

void gemm_nt(const Matrix& A, const Matrix& B, Matrix& C) {
  check(A.cols == B.cols, "gemm_nt: inner dimensions differ");
  serial::gemm_nn(A, transpose(B), C);
}

}  // namespace serial

namespace parallel {

void gemm_nn(const Matrix& A, const Matrix& B, Matrix& C) {
  prepare_nn(A, B, C);
  const auto rows = static_cast<long long>(A.rows);
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < rows; ++i) nn_row(A, B, C, static_cast<std::size_t>(i));
}

void gemm_tn(const Matrix& A, const Matrix& B, Matrix& C) {
  prepare_tn(A, B, C);
  const auto rows = static_cast<long long>(A.cols);
#pragma omp parallel for schedule(static)
  for (long long k = 0; k < rows; ++k) tn_row(A, B, C, static_cast<std::size_t>(k));
}

void gemm_nt(const Matrix& A, const Matrix& B, Matrix& C) {
  check(A.cols == B.cols, "gemm_nt: inner dimensions differ");
  parallel::gemm_nn(A, transpose(B), C);
}

}  // namespace parallel

void add_row_vector(Matrix& C, std::span<const double> bias) {
  check(bias.size() == C.cols, "add_row_vector: length mismatch");
  for (std::size_t i = 0; i < C.rows; ++i) {
    double* c = C.data.data() + i * C.cols;
    for (std::size_t j = 0; j < C.cols; ++j) c[j] += bias[j];
  }
}

void column_sums(const Matrix& A, std::span<double> out) {
  check(out.size() == A.cols, "column_sums: length mismatch");
  for (std::size_t j = 0; j < A.cols; ++j) out[j] = 0.0;
  for (std::size_t i = 0; i < A.rows; ++i) {
    const double* a = A.data.data() + i * A.cols;
    for (std::size_t j = 0; j < A.cols; ++j) out[j] += a[j];
  }
}

}  // namespace sdoa::kernels
