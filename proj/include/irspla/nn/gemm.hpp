#pragma once

#include <algorithm>
#include <cstddef>
#include <cstring>
#include <vector>

#if defined(__GNUC__) && !defined(__clang__)
#pragma GCC diagnostic push
#pragma GCC diagnostic ignored "-Wpsabi"
#endif

namespace irspla::nn::kernels {

namespace detail {

using v4d = double __attribute__((vector_size(32)));

inline v4d load4(const double* p) {
  v4d v;
  std::memcpy(&v, p, sizeof v);
  return v;
}

inline void store4(double* p, v4d v) { std::memcpy(p, &v, sizeof v); }

// 4 x 12 register tile: C[0:4, 0:12] += A[0:4, :] * B[:, 0:12].
inline void tile_4x12(std::size_t k, const double* a, std::size_t lda, const double* b, std::size_t ldb, double* c,
                      std::size_t ldc) {
  v4d c00{}, c01{}, c02{}, c10{}, c11{}, c12{}, c20{}, c21{}, c22{}, c30{}, c31{}, c32{};
  for (std::size_t p = 0; p < k; ++p) {
    const double* bp = b + p * ldb;
    const v4d b0 = load4(bp), b1 = load4(bp + 4), b2 = load4(bp + 8);
    const double a0 = a[p], a1 = a[lda + p], a2 = a[2 * lda + p], a3 = a[3 * lda + p];
    c00 += a0 * b0; c01 += a0 * b1; c02 += a0 * b2;
    c10 += a1 * b0; c11 += a1 * b1; c12 += a1 * b2;
    c20 += a2 * b0; c21 += a2 * b1; c22 += a2 * b2;
    c30 += a3 * b0; c31 += a3 * b1; c32 += a3 * b2;
  }
  const v4d rows[4][3] = {{c00, c01, c02}, {c10, c11, c12}, {c20, c21, c22}, {c30, c31, c32}};
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      double* dst = c + i * ldc + 4 * j;
      store4(dst, load4(dst) + rows[i][j]);
    }
}

// Scalar edge: same per-element accumulation order over k as the tile.
inline void edge(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t lda, const double* b,
                 std::size_t ldb, double* c, std::size_t ldc) {
  std::vector<double> acc(n);
  for (std::size_t i = 0; i < m; ++i) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a[i * lda + p];
      const double* bp = b + p * ldb;
      for (std::size_t j = 0; j < n; ++j) acc[j] += av * bp[j];
    }
    for (std::size_t j = 0; j < n; ++j) c[i * ldc + j] += acc[j];
  }
}

}  // namespace detail

/// C[m,n] += A[m,k] * B[k,n], all row-major with the given leading
/// dimensions.
inline void gemm(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t lda, const double* b,
                 std::size_t ldb, double* c, std::size_t ldc) {
  constexpr std::size_t MR = 4, NR = 12;
  const std::size_t m_full = m - m % MR, n_full = n - n % NR;
  for (std::size_t i = 0; i < m_full; i += MR) {
    for (std::size_t j = 0; j < n_full; j += NR)
      detail::tile_4x12(k, a + i * lda, lda, b + j, ldb, c + i * ldc + j, ldc);
    if (n_full < n) detail::edge(MR, n - n_full, k, a + i * lda, lda, b + n_full, ldb, c + i * ldc + n_full, ldc);
  }
  if (m_full < m) detail::edge(m - m_full, n, k, a + m_full * lda, lda, b, ldb, c + m_full * ldc, ldc);
}

/// Row-major transpose of an m x n block.
inline std::vector<double> transposed(const double* a, std::size_t m, std::size_t n) {
  std::vector<double> out(m * n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[j * m + i] = a[i * n + j];
  return out;
}

}  // namespace irspla::nn::kernels

#if defined(__GNUC__) && !defined(__clang__)
#pragma GCC diagnostic pop
#endif
