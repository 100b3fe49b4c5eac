// AVX2 variants of the kernel table, reached only after a runtime CPU check.
//
// The target is enabled per function (pragma below) instead of -mavx2 on the
// whole file, so inline library code instantiated here is never merged into
// the scalar path with VEX encodings.
#include <immintrin.h>

#include <cmath>

#include "scalar_ops.hpp"

#if defined(__clang__)
#pragma clang attribute push(__attribute__((target("avx2"))), apply_to = function)
#elif defined(__GNUC__)
#pragma GCC push_options
#pragma GCC target("avx2")
#endif

namespace lpwalk::detail {

namespace {

// No namespace-scope vector constants: they would run AVX code during static
// initialization on CPUs that fail the dispatch check.
inline __m256d sign_mask() { return _mm256_set1_pd(-0.0); }

inline __m256d vabs(__m256d v) { return _mm256_andnot_pd(sign_mask(), v); }

inline double hsum(__m256d v) {
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, v);
  return (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
}

inline double hmax(__m256d v) {
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, v);
  const double a = lanes[0] > lanes[1] ? lanes[0] : lanes[1];
  const double b = lanes[2] > lanes[3] ? lanes[2] : lanes[3];
  return a > b ? a : b;
}

/// a^k by k repeated multiplies, matching ipow() lane for lane.
inline __m256d vipow(__m256d a, int k) {
  __m256d r = _mm256_set1_pd(1.0);
  for (int i = 0; i < k; ++i) r = _mm256_mul_pd(r, a);
  return r;
}

/// |a|^p for a >= 0; only Integer and HalfInteger kinds reach here.
inline __m256d vabs_pow(__m256d a, const PowerSpec& pw) {
  __m256d r = vipow(a, pw.whole);
  if (pw.kind == PowerKind::HalfInteger) r = _mm256_mul_pd(r, _mm256_sqrt_pd(a));
  return r;
}

double avx2_abs_max(std::span<const double> v) {
  const std::size_t n = v.size();
  std::size_t i = 0;
  __m256d m = _mm256_setzero_pd();
  for (; i + 4 <= n; i += 4) m = _mm256_max_pd(m, vabs(_mm256_loadu_pd(v.data() + i)));
  double out = hmax(m);
  for (; i < n; ++i) {
    const double x = std::abs(v[i]);
    out = x > out ? x : out;
  }
  return out;
}

double avx2_pow_sum(std::span<const double> v, const PowerSpec& pw, double scale) {
  if (pw.kind == PowerKind::General) return scalar_pow_sum(v, pw, scale);
  const std::size_t n = v.size();
  const __m256d sc = _mm256_set1_pd(scale);
  __m256d acc0 = _mm256_setzero_pd(), acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256d a0 = vabs(_mm256_mul_pd(_mm256_loadu_pd(v.data() + i), sc));
    const __m256d a1 = vabs(_mm256_mul_pd(_mm256_loadu_pd(v.data() + i + 4), sc));
    acc0 = _mm256_add_pd(acc0, vabs_pow(a0, pw));
    acc1 = _mm256_add_pd(acc1, vabs_pow(a1, pw));
  }
  double sum = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) sum += abs_pow(std::abs(v[i] * scale), pw);
  return sum;
}

double avx2_diff_abs_max(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  std::size_t i = 0;
  __m256d m = _mm256_setzero_pd();
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a.data() + i), _mm256_loadu_pd(b.data() + i));
    m = _mm256_max_pd(m, vabs(d));
  }
  double out = hmax(m);
  for (; i < n; ++i) {
    const double x = std::abs(a[i] - b[i]);
    out = x > out ? x : out;
  }
  return out;
}

double avx2_diff_pow_sum(std::span<const double> a, std::span<const double> b, const PowerSpec& pw,
                         double scale) {
  if (pw.kind == PowerKind::General) return scalar_diff_pow_sum(a, b, pw, scale);
  const std::size_t n = a.size();
  const __m256d sc = _mm256_set1_pd(scale);
  __m256d acc0 = _mm256_setzero_pd(), acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(a.data() + i), _mm256_loadu_pd(b.data() + i));
    const __m256d d1 =
        _mm256_sub_pd(_mm256_loadu_pd(a.data() + i + 4), _mm256_loadu_pd(b.data() + i + 4));
    acc0 = _mm256_add_pd(acc0, vabs_pow(vabs(_mm256_mul_pd(d0, sc)), pw));
    acc1 = _mm256_add_pd(acc1, vabs_pow(vabs(_mm256_mul_pd(d1, sc)), pw));
  }
  double sum = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) sum += abs_pow(std::abs((a[i] - b[i]) * scale), pw);
  return sum;
}

void avx2_axpy(double alpha, std::span<const double> x, std::span<double> y) {
  const std::size_t n = x.size();
  const __m256d al = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d prod = _mm256_mul_pd(al, _mm256_loadu_pd(x.data() + i));
    _mm256_storeu_pd(y.data() + i, _mm256_add_pd(_mm256_loadu_pd(y.data() + i), prod));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

StepSums avx2_decomposition_step(std::span<double> s, std::span<const double> x,
                                 const PowerSpec& pw, const PowerSpec& psi_pw) {
  if (pw.kind == PowerKind::General || psi_pw.kind == PowerKind::General) {
    return scalar_decomposition_step(s, x, pw, psi_pw);
  }
  const std::size_t n = s.size();
  const __m256d zero = _mm256_setzero_pd();
  __m256d qacc = zero, nacc = zero;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d sv = _mm256_loadu_pd(s.data() + i);
    const __m256d xv = _mm256_loadu_pd(x.data() + i);
    // psi(s) = copysign(|s|^{p-1}, s), forced to 0 where s == 0
    const __m256d mag = vabs_pow(vabs(sv), psi_pw);
    const __m256d signed_mag = _mm256_or_pd(mag, _mm256_and_pd(sv, sign_mask()));
    const __m256d nonzero = _mm256_cmp_pd(sv, zero, _CMP_NEQ_OQ);
    const __m256d ps = _mm256_and_pd(signed_mag, nonzero);
    qacc = _mm256_add_pd(qacc, _mm256_mul_pd(xv, ps));
    const __m256d snew = _mm256_add_pd(sv, xv);
    _mm256_storeu_pd(s.data() + i, snew);
    nacc = _mm256_add_pd(nacc, vabs_pow(vabs(snew), pw));
  }
  StepSums out{hsum(qacc), hsum(nacc)};
  for (; i < n; ++i) {
    out.psi_dot += x[i] * psi(s[i], psi_pw);
    s[i] += x[i];
    out.pow_sum += abs_pow(std::abs(s[i]), pw);
  }
  return out;
}

}  // namespace

const KernelTable kAvx2Table{
    "avx2",
    avx2_abs_max,
    avx2_pow_sum,
    avx2_diff_abs_max,
    avx2_diff_pow_sum,
    avx2_axpy,
    avx2_decomposition_step,
};

}  // namespace lpwalk::detail

#if defined(__clang__)
#pragma clang attribute pop
#elif defined(__GNUC__)
#pragma GCC pop_options
#endif
