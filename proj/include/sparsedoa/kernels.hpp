#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace sdoa::kernels {

/// Dense row-major real matrix used by the network code.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
  void resize(std::size_t r, std::size_t c) {
    rows = r;
    cols = c;
    data.assign(r * c, 0.0);
  }
};

Matrix transpose(const Matrix& A);

// Every kernel accumulates each output element in the same fixed order in
// both implementations, so serial and parallel results are bit-identical
// for any thread count.

namespace serial {
/// C = A * B
void gemm_nn(const Matrix& A, const Matrix& B, Matrix& C);
/// C = A^T * B
void gemm_tn(const Matrix& A, const Matrix& B, Matrix& C);
/// C = A * B^T
void gemm_nt(const Matrix& A, const Matrix& B, Matrix& C);
}  // namespace serial

namespace parallel {
void gemm_nn(const Matrix& A, const Matrix& B, Matrix& C);
void gemm_tn(const Matrix& A, const Matrix& B, Matrix& C);
void gemm_nt(const Matrix& A, const Matrix& B, Matrix& C);
}  // namespace parallel

// Default entry points used by the network (OpenMP versions).
inline void gemm_nn(const Matrix& A, const Matrix& B, Matrix& C) { parallel::gemm_nn(A, B, C); }
inline void gemm_tn(const Matrix& A, const Matrix& B, Matrix& C) { parallel::gemm_tn(A, B, C); }
inline void gemm_nt(const Matrix& A, const Matrix& B, Matrix& C) { parallel::gemm_nt(A, B, C); }

/// Adds `bias` to every row of C.
void add_row_vector(Matrix& C, std::span<const double> bias);
/// out[j] = sum_i A(i, j), summed in row order.
void column_sums(const Matrix& A, std::span<double> out);

}  // namespace sdoa::kernels
