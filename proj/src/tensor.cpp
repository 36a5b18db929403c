#include "dnet/tensor.hpp"

#include <algorithm>
#include <cstring>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace dnet {

namespace {

int64_t gemm_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

} // namespace

// The (row band, column block) partition is free to vary: each output
// element is always reduced over k in ascending order, so any partition and
// thread count give bitwise-identical results.
template <typename T>
void gemm_buf(const T* a, const T* b, T* c, int64_t m, int64_t k, int64_t n) {
    const int64_t threads = gemm_threads();
    int64_t jbw = 256;
    if ((n + jbw - 1) / jbw < threads)
        jbw = std::max<int64_t>(16, ((n + threads - 1) / threads + 15) / 16 * 16);
    const int64_t jblocks = (n + jbw - 1) / jbw;
    const int64_t ibands = (jblocks >= 2 * threads || m < 2) ? 1 : std::min<int64_t>(m, threads);
    const int64_t ibh = (m + ibands - 1) / ibands;
    const int64_t tasks = jblocks * ibands;

#pragma omp parallel for schedule(static)
    for (int64_t task = 0; task < tasks; ++task) {
        const int64_t jb = task % jblocks, ib = task / jblocks;
        const int64_t j0 = jb * jbw;
        const int64_t j1 = std::min(n, j0 + jbw);
        const int64_t i0 = ib * ibh;
        const int64_t i1 = std::min(m, i0 + ibh);
        for (int64_t i = i0; i < i1; ++i) {
            T* __restrict crow = c + i * n;
            for (int64_t j = j0; j < j1; ++j) crow[j] = T(0);
            const T* __restrict arow = a + i * k;
            for (int64_t kk = 0; kk < k; ++kk) {
                const T aik = arow[kk];
                const T* __restrict brow = b + kk * n;
                for (int64_t j = j0; j < j1; ++j) crow[j] += aik * brow[j];
            }
        }
    }
}

template <typename T>
void transpose_buf(const T* in, T* out, int64_t m, int64_t n) {
    constexpr int64_t B = 32;
    for (int64_t i0 = 0; i0 < m; i0 += B)
        for (int64_t j0 = 0; j0 < n; j0 += B) {
            const int64_t i1 = std::min(m, i0 + B);
            const int64_t j1 = std::min(n, j0 + B);
            for (int64_t i = i0; i < i1; ++i)
                for (int64_t j = j0; j < j1; ++j) out[j * m + i] = in[i * n + j];
        }
}

template <typename T>
void im2col_into(const T* x, T* cols, const ConvGeom& g, int64_t row_stride,
                 int64_t col_offset) {
    const int64_t ow = g.out_w, oh = g.out_h;
    for (int64_t q = 0; q < g.channels * g.kernel * g.kernel; ++q) {
        const int64_t ci = q / (g.kernel * g.kernel);
        const int64_t kh = (q / g.kernel) % g.kernel;
        const int64_t kw = q % g.kernel;
        const T* plane = x + ci * g.in_h * g.in_w;
        T* row = cols + q * row_stride + col_offset;
        for (int64_t y = 0; y < oh; ++y) {
            const int64_t ih = y * g.stride + kh - g.pad;
            T* dst = row + y * ow;
            if (ih < 0 || ih >= g.in_h) {
                std::fill(dst, dst + ow, T(0));
                continue;
            }
            const T* src = plane + ih * g.in_w;
            for (int64_t xo = 0; xo < ow; ++xo) {
                const int64_t iw = xo * g.stride + kw - g.pad;
                dst[xo] = (iw >= 0 && iw < g.in_w) ? src[iw] : T(0);
            }
        }
    }
}

template <typename T>
void col2im_from(const T* dcols, T* dx, const ConvGeom& g, int64_t row_stride,
                 int64_t col_offset) {
    for (int64_t ci = 0; ci < g.channels; ++ci) {
        T* plane = dx + ci * g.in_h * g.in_w;
        for (int64_t kh = 0; kh < g.kernel; ++kh)
            for (int64_t kw = 0; kw < g.kernel; ++kw) {
                const int64_t q = (ci * g.kernel + kh) * g.kernel + kw;
                const T* row = dcols + q * row_stride + col_offset;
                for (int64_t y = 0; y < g.out_h; ++y) {
                    const int64_t ih = y * g.stride + kh - g.pad;
                    if (ih < 0 || ih >= g.in_h) continue;
                    T* dst = plane + ih * g.in_w;
                    const T* src = row + y * g.out_w;
                    for (int64_t xo = 0; xo < g.out_w; ++xo) {
                        const int64_t iw = xo * g.stride + kw - g.pad;
                        if (iw >= 0 && iw < g.in_w) dst[iw] += src[xo];
                    }
                }
            }
    }
}

template void gemm_buf<float>(const float*, const float*, float*, int64_t, int64_t, int64_t);
template void gemm_buf<double>(const double*, const double*, double*, int64_t, int64_t, int64_t);
template void transpose_buf<float>(const float*, float*, int64_t, int64_t);
template void transpose_buf<double>(const double*, double*, int64_t, int64_t);
template void im2col_into<float>(const float*, float*, const ConvGeom&, int64_t, int64_t);
template void im2col_into<double>(const double*, double*, const ConvGeom&, int64_t, int64_t);
template void col2im_from<float>(const float*, float*, const ConvGeom&, int64_t, int64_t);
template void col2im_from<double>(const double*, double*, const ConvGeom&, int64_t, int64_t);

} // namespace dnet
