#pragma once

#include <cmath>
#include <cstring>

#include "imitant/tensor.hpp"

// Raw numeric kernels shared by the autodiff ops and the tape-free
// inference paths. Keeping a single implementation of each loop pins the
// accumulation order, so teacher-forcing scores, cached decoding and
// training forwards agree bit for bit.

namespace imitant {

// C[M x N] = A[M x K] * B[K x N], accumulate==false clears C first.
inline void mm_nn(const double* a, const double* b, double* c, int M, int K, int N,
                  bool accumulate = false) {
  for (int i = 0; i < M; ++i) {
    double* ci = c + static_cast<std::size_t>(i) * N;
    if (!accumulate) std::memset(ci, 0, sizeof(double) * static_cast<std::size_t>(N));
    const double* ai = a + static_cast<std::size_t>(i) * K;
    for (int k = 0; k < K; ++k) {
      const double aik = ai[k];
      const double* bk = b + static_cast<std::size_t>(k) * N;
      for (int j = 0; j < N; ++j) ci[j] += aik * bk[j];
    }
  }
}

// C[M x N] = A[M x K] * B[N x K]^T
inline void mm_nt(const double* a, const double* b, double* c, int M, int K, int N,
                  bool accumulate = false) {
  for (int i = 0; i < M; ++i) {
    const double* ai = a + static_cast<std::size_t>(i) * K;
    double* ci = c + static_cast<std::size_t>(i) * N;
    for (int j = 0; j < N; ++j) {
      const double* bj = b + static_cast<std::size_t>(j) * K;
      double s = 0.0;
      for (int k = 0; k < K; ++k) s += ai[k] * bj[k];
      ci[j] = accumulate ? ci[j] + s : s;
    }
  }
}

// C[K x N] = A[M x K]^T * B[M x N]
inline void mm_tn(const double* a, const double* b, double* c, int M, int K, int N,
                  bool accumulate = false) {
  if (!accumulate) std::memset(c, 0, sizeof(double) * static_cast<std::size_t>(K) * N);
  for (int i = 0; i < M; ++i) {
    const double* ai = a + static_cast<std::size_t>(i) * K;
    const double* bi = b + static_cast<std::size_t>(i) * N;
    for (int k = 0; k < K; ++k) {
      const double aik = ai[k];
      double* ck = c + static_cast<std::size_t>(k) * N;
      for (int j = 0; j < N; ++j) ck[j] += aik * bi[j];
    }
  }
}

// In-place numerically stabilized softmax over x[0..n); max is subtracted
// before exponentiation so large logits cannot overflow.
inline void softmax_row(double* x, int n) {
  double mx = x[0];
  for (int i = 1; i < n; ++i) mx = std::max(mx, x[i]);
  double z = 0.0;
  for (int i = 0; i < n; ++i) {
    x[i] = std::exp(x[i] - mx);
    z += x[i];
  }
  const double inv = 1.0 / z;
  for (int i = 0; i < n; ++i) x[i] *= inv;
}

// log-softmax of row into out (out may alias x)
inline void log_softmax_row(const double* x, double* out, int n) {
  double mx = x[0];
  for (int i = 1; i < n; ++i) mx = std::max(mx, x[i]);
  double z = 0.0;
  for (int i = 0; i < n; ++i) z += std::exp(x[i] - mx);
  const double lz = std::log(z) + mx;
  for (int i = 0; i < n; ++i) out[i] = x[i] - lz;
}

// Softmax restricted to positions where keep[i] != 0; excluded positions get
// probability exactly 0 and never enter the exp/sum (no -inf intermediates).
// Returns the number of kept positions.
inline int masked_softmax_row(double* x, const unsigned char* keep, int n) {
  int kept = 0;
  double mx = 0.0;
  for (int i = 0; i < n; ++i) {
    if (!keep[i]) continue;
    mx = (kept == 0) ? x[i] : std::max(mx, x[i]);
    ++kept;
  }
  if (kept == 0) return 0;
  double z = 0.0;
  for (int i = 0; i < n; ++i) {
    if (keep[i]) {
      x[i] = std::exp(x[i] - mx);
      z += x[i];
    } else {
      x[i] = 0.0;
    }
  }
  const double inv = 1.0 / z;
  for (int i = 0; i < n; ++i) x[i] *= inv;
  return kept;
}

// y = (x - mean) / sqrt(var + eps) over one row; returns mean and the
// reciprocal standard deviation for the backward pass.
inline void layer_norm_row(const double* x, double* y, int n, double eps, double* out_mean,
                           double* out_rstd) {
  double mean = 0.0;
  for (int i = 0; i < n; ++i) mean += x[i];
  mean /= n;
  double var = 0.0;
  for (int i = 0; i < n; ++i) {
    const double d = x[i] - mean;
    var += d * d;
  }
  var /= n;
  const double rstd = 1.0 / std::sqrt(var + eps);
  for (int i = 0; i < n; ++i) y[i] = (x[i] - mean) * rstd;
  *out_mean = mean;
  *out_rstd = rstd;
}

}  // namespace imitant
