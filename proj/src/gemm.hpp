#pragma once

#include <cstddef>

// Row-major accumulate-into GEMM kernels. Loop orders keep the innermost
// loop contiguous so the compiler can vectorize; reductions use a fixed
// order so results are reproducible run to run.
namespace cftrack::kernels {

// C[M,N] += A[M,K] * B[K,N]
template <typename T>
void gemm_nn(int M, int N, int K, const T* __restrict A, const T* __restrict B, T* __restrict C) {
  for (int i = 0; i < M; ++i) {
    T* c = C + static_cast<std::size_t>(i) * N;
    const T* a = A + static_cast<std::size_t>(i) * K;
    int k = 0;
    for (; k + 4 <= K; k += 4) {
      const T a0 = a[k], a1 = a[k + 1], a2 = a[k + 2], a3 = a[k + 3];
      const T* b0 = B + static_cast<std::size_t>(k) * N;
      const T* b1 = b0 + N;
      const T* b2 = b1 + N;
      const T* b3 = b2 + N;
#pragma omp simd
      for (int j = 0; j < N; ++j) c[j] += a0 * b0[j] + a1 * b1[j] + a2 * b2[j] + a3 * b3[j];
    }
    for (; k < K; ++k) {
      const T av = a[k];
      const T* b = B + static_cast<std::size_t>(k) * N;
#pragma omp simd
      for (int j = 0; j < N; ++j) c[j] += av * b[j];
    }
  }
}

// C[M,N] += A[K,M]^T * B[K,N]
template <typename T>
void gemm_tn(int M, int N, int K, const T* __restrict A, const T* __restrict B, T* __restrict C) {
  for (int k = 0; k < K; ++k) {
    const T* a = A + static_cast<std::size_t>(k) * M;
    const T* b = B + static_cast<std::size_t>(k) * N;
    for (int i = 0; i < M; ++i) {
      const T av = a[i];
      if (av == T(0)) continue;
      T* c = C + static_cast<std::size_t>(i) * N;
#pragma omp simd
      for (int j = 0; j < N; ++j) c[j] += av * b[j];
    }
  }
}

// C[M,N] += A[M,K] * B[N,K]^T
template <typename T>
void gemm_nt(int M, int N, int K, const T* __restrict A, const T* __restrict B, T* __restrict C) {
  for (int i = 0; i < M; ++i) {
    const T* a = A + static_cast<std::size_t>(i) * K;
    for (int j = 0; j < N; ++j) {
      const T* b = B + static_cast<std::size_t>(j) * K;
      T sum = T(0);
#pragma omp simd reduction(+ : sum)
      for (int k = 0; k < K; ++k) sum += a[k] * b[k];
      C[static_cast<std::size_t>(i) * N + j] += sum;
    }
  }
}

}  // namespace cftrack::kernels
