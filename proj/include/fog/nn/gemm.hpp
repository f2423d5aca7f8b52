#pragma once

#include <cstring>
#include <type_traits>
#include <vector>

#if defined(__AVX2__) && defined(__FMA__)
#include <immintrin.h>
#define FOG_GEMM_AVX2 1
#endif

namespace fog {

enum class Trans { no, yes };

namespace detail {

// Cache-blocking parameters for the packed microkernel path. MR x NR is the
// register tile: 6x16 floats = 12 accumulator registers, leaving room for
// two B loads and one A broadcast.
inline constexpr int kMR = 6;
inline constexpr int kNR = 16;
inline constexpr int kMC = 96;
inline constexpr int kKC = 256;
inline constexpr int kNC = 2048;

// Element of op(A) at logical row i, column k, where op transposes when
// requested and ld is the row stride of the stored matrix.
template <typename T>
inline T a_elem(const T* a, int lda, Trans ta, int i, int k) {
    return ta == Trans::no ? a[static_cast<std::size_t>(i) * lda + k]
                           : a[static_cast<std::size_t>(k) * lda + i];
}

template <typename T>
inline T b_elem(const T* b, int ldb, Trans tb, int k, int j) {
    return tb == Trans::no ? b[static_cast<std::size_t>(k) * ldb + j]
                           : b[static_cast<std::size_t>(j) * ldb + k];
}

// Packs an mc x kc block of op(A) into MR-row panels, zero-padding the row
// remainder so the microkernel never branches on M.
template <typename T>
inline void pack_a(const T* a, int lda, Trans ta, int i0, int k0, int mc, int kc, T* out) {
    for (int i = 0; i < mc; i += kMR) {
        int rows = mc - i < kMR ? mc - i : kMR;
        for (int k = 0; k < kc; ++k) {
            for (int r = 0; r < kMR; ++r) {
                *out++ = r < rows ? a_elem(a, lda, ta, i0 + i + r, k0 + k) : T(0);
            }
        }
    }
}

// Packs a kc x nc block of op(B) into NR-column panels with zero padding.
template <typename T>
inline void pack_b(const T* b, int ldb, Trans tb, int k0, int j0, int kc, int nc, T* out) {
    for (int j = 0; j < nc; j += kNR) {
        int cols = nc - j < kNR ? nc - j : kNR;
        for (int k = 0; k < kc; ++k) {
            for (int c = 0; c < kNR; ++c) {
                *out++ = c < cols ? b_elem(b, ldb, tb, k0 + k, j0 + j + c) : T(0);
            }
        }
    }
}

#ifdef FOG_GEMM_AVX2
// C tile (rows x cols, rows <= 6, cols <= 16) += packed A panel * packed B
// panel over kc terms. acc_tail writes through a stack tile for partial
// edges so loads/stores never run past C.
inline void micro_6x16_f32(int kc, const float* ap, const float* bp, float* c, int ldc, int rows,
                           int cols, bool accumulate) {
    __m256 acc[kMR][2];
    for (int r = 0; r < kMR; ++r) {
        acc[r][0] = _mm256_setzero_ps();
        acc[r][1] = _mm256_setzero_ps();
    }
    for (int k = 0; k < kc; ++k) {
        __m256 b0 = _mm256_loadu_ps(bp + k * kNR);
        __m256 b1 = _mm256_loadu_ps(bp + k * kNR + 8);
        const float* arow = ap + k * kMR;
        for (int r = 0; r < kMR; ++r) {
            __m256 a = _mm256_set1_ps(arow[r]);
            acc[r][0] = _mm256_fmadd_ps(a, b0, acc[r][0]);
            acc[r][1] = _mm256_fmadd_ps(a, b1, acc[r][1]);
        }
    }
    if (rows == kMR && cols == kNR) {
        for (int r = 0; r < kMR; ++r) {
            float* crow = c + static_cast<std::size_t>(r) * ldc;
            if (accumulate) {
                _mm256_storeu_ps(crow, _mm256_add_ps(_mm256_loadu_ps(crow), acc[r][0]));
                _mm256_storeu_ps(crow + 8, _mm256_add_ps(_mm256_loadu_ps(crow + 8), acc[r][1]));
            } else {
                _mm256_storeu_ps(crow, acc[r][0]);
                _mm256_storeu_ps(crow + 8, acc[r][1]);
            }
        }
        return;
    }
    alignas(32) float tile[kMR * kNR];
    for (int r = 0; r < kMR; ++r) {
        _mm256_store_ps(tile + r * kNR, acc[r][0]);
        _mm256_store_ps(tile + r * kNR + 8, acc[r][1]);
    }
    for (int r = 0; r < rows; ++r) {
        float* crow = c + static_cast<std::size_t>(r) * ldc;
        for (int j = 0; j < cols; ++j) {
            if (accumulate) {
                crow[j] += tile[r * kNR + j];
            } else {
                crow[j] = tile[r * kNR + j];
            }
        }
    }
}
#endif

// Portable microkernel for non-float element types (double-precision
// gradient checks run through here).
template <typename T>
inline void micro_generic(int kc, const T* ap, const T* bp, T* c, int ldc, int rows, int cols,
                          bool accumulate) {
    T tile[kMR * kNR] = {};
    for (int k = 0; k < kc; ++k) {
        const T* arow = ap + k * kMR;
        const T* brow = bp + k * kNR;
        for (int r = 0; r < kMR; ++r) {
            T a = arow[r];
            for (int j = 0; j < kNR; ++j) tile[r * kNR + j] += a * brow[j];
        }
    }
    for (int r = 0; r < rows; ++r) {
        T* crow = c + static_cast<std::size_t>(r) * ldc;
        for (int j = 0; j < cols; ++j) {
            if (accumulate) {
                crow[j] += tile[r * kNR + j];
            } else {
                crow[j] = tile[r * kNR + j];
            }
        }
    }
}

}  // namespace detail

// C (M x N, row stride ldc) = op(A) * op(B), or += when accumulate is set.
// Single-threaded, fixed blocking and summation order, so results are
// bit-identical across runs and machines with the same FP contraction.
template <typename T>
inline void gemm(Trans ta, Trans tb, int m, int n, int k, const T* a, int lda, const T* b,
                 int ldb, T* c, int ldc, bool accumulate = false) {
    using namespace detail;
    if (m <= 0 || n <= 0) return;
    if (k <= 0) {
        if (!accumulate) {
            for (int i = 0; i < m; ++i) {
                std::memset(c + static_cast<std::size_t>(i) * ldc, 0,
                            static_cast<std::size_t>(n) * sizeof(T));
            }
        }
        return;
    }
    std::vector<T> ap(static_cast<std::size_t>(kMC) * kKC + kMR * kKC);
    std::vector<T> bp(static_cast<std::size_t>(kKC) * kNC + kNR * kKC);

    for (int j0 = 0; j0 < n; j0 += kNC) {
        int nc = n - j0 < kNC ? n - j0 : kNC;
        for (int k0 = 0; k0 < k; k0 += kKC) {
            int kc = k - k0 < kKC ? k - k0 : kKC;
            // First k-block overwrites C (unless accumulating); later blocks
            // always accumulate partial products.
            bool acc_block = accumulate || k0 > 0;
            pack_b(b, ldb, tb, k0, j0, kc, nc, bp.data());
            for (int i0 = 0; i0 < m; i0 += kMC) {
                int mc = m - i0 < kMC ? m - i0 : kMC;
                pack_a(a, lda, ta, i0, k0, mc, kc, ap.data());
                for (int jr = 0; jr < nc; jr += kNR) {
                    int cols = nc - jr < kNR ? nc - jr : kNR;
                    const T* bpan = bp.data() + static_cast<std::size_t>(jr / kNR) * kc * kNR;
                    for (int ir = 0; ir < mc; ir += kMR) {
                        int rows = mc - ir < kMR ? mc - ir : kMR;
                        const T* apan = ap.data() + static_cast<std::size_t>(ir / kMR) * kc * kMR;
                        T* ctile = c + static_cast<std::size_t>(i0 + ir) * ldc + (j0 + jr);
#ifdef FOG_GEMM_AVX2
                        if constexpr (std::is_same_v<T, float>) {
                            micro_6x16_f32(kc, apan, bpan, ctile, ldc, rows, cols, acc_block);
                        } else {
                            micro_generic(kc, apan, bpan, ctile, ldc, rows, cols, acc_block);
                        }
#else
                        micro_generic(kc, apan, bpan, ctile, ldc, rows, cols, acc_block);
#endif
                    }
                }
            }
        }
    }
}

}  // namespace fog
