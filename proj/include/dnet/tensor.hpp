#ifndef DNET_TENSOR_HPP
#define DNET_TENSOR_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

#include "dnet/errors.hpp"
#include "dnet/rng.hpp"

namespace dnet {

// Shape of a dense row-major array, rank 1..4. Rank-4 is NCHW.
struct Shape {
    std::array<int64_t, 4> d{1, 1, 1, 1};
    int rank = 0;

    Shape() = default;
    Shape(std::initializer_list<int64_t> dims) {
        if (dims.size() < 1 || dims.size() > 4)
            throw ShapeError("shape rank must be 1..4");
        rank = int(dims.size());
        int i = 0;
        for (int64_t v : dims) {
            if (v < 1) throw ShapeError("shape extents must be >= 1");
            d[i++] = v;
        }
    }

    int64_t numel() const {
        int64_t n = 1;
        for (int i = 0; i < rank; ++i) n *= d[i];
        return n;
    }

    int64_t operator[](int i) const { return d[i]; }

    bool operator==(const Shape& o) const {
        if (rank != o.rank) return false;
        for (int i = 0; i < rank; ++i)
            if (d[i] != o.d[i]) return false;
        return true;
    }
    bool operator!=(const Shape& o) const { return !(*this == o); }

    std::string str() const {
        std::string s;
        for (int i = 0; i < rank; ++i) {
            if (i) s += 'x';
            s += std::to_string(d[i]);
        }
        return s;
    }
};

// Dense row-major numeric array. Value semantics; float for training,
// double for gradient verification.
template <typename T>
class TensorT {
public:
    TensorT() = default;
    explicit TensorT(Shape s) : shape_(s), data_(size_t(s.numel()), T(0)) {}
    TensorT(Shape s, std::vector<T> data) : shape_(s), data_(std::move(data)) {
        if (int64_t(data_.size()) != shape_.numel())
            throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                             " does not match shape " + shape_.str());
    }

    static TensorT zeros(Shape s) { return TensorT(s); }

    const Shape& shape() const { return shape_; }
    int64_t numel() const { return int64_t(data_.size()); }
    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }
    std::vector<T>& vec() { return data_; }
    const std::vector<T>& vec() const { return data_; }

    T& operator[](int64_t i) { return data_[size_t(i)]; }
    const T& operator[](int64_t i) const { return data_[size_t(i)]; }

    T& at(int64_t a) { return data_[size_t(a)]; }
    T& at(int64_t a, int64_t b) { return data_[size_t(a * shape_.d[1] + b)]; }
    T& at(int64_t a, int64_t b, int64_t c) {
        return data_[size_t((a * shape_.d[1] + b) * shape_.d[2] + c)];
    }
    T& at(int64_t a, int64_t b, int64_t c, int64_t e) {
        return data_[size_t(((a * shape_.d[1] + b) * shape_.d[2] + c) * shape_.d[3] + e)];
    }
    const T& at(int64_t a) const { return data_[size_t(a)]; }
    const T& at(int64_t a, int64_t b) const { return data_[size_t(a * shape_.d[1] + b)]; }
    const T& at(int64_t a, int64_t b, int64_t c) const {
        return data_[size_t((a * shape_.d[1] + b) * shape_.d[2] + c)];
    }
    const T& at(int64_t a, int64_t b, int64_t c, int64_t e) const {
        return data_[size_t(((a * shape_.d[1] + b) * shape_.d[2] + c) * shape_.d[3] + e)];
    }

    // In-place reinterpretation; element count must not change.
    void reshape(Shape s) {
        if (s.numel() != shape_.numel())
            throw ShapeError("reshape " + shape_.str() + " -> " + s.str() +
                             " changes element count");
        shape_ = s;
    }

    void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

    bool all_finite() const {
        for (T v : data_)
            if (!std::isfinite(double(v))) return false;
        return true;
    }

private:
    Shape shape_;
    std::vector<T> data_;
};

using Tensor = TensorT<float>;
using DTensor = TensorT<double>;

// c[MxN] = a[MxK] * b[KxN]. Row-major. The per-element reduction runs over k
// in ascending order regardless of how columns are partitioned across
// threads, so results are bitwise identical for any thread count.
template <typename T>
void gemm_buf(const T* a, const T* b, T* c, int64_t m, int64_t k, int64_t n);

template <typename T>
TensorT<T> gemm(const TensorT<T>& a, const TensorT<T>& b) {
    if (a.shape().rank != 2 || b.shape().rank != 2)
        throw ShapeError("gemm expects rank-2 tensors");
    if (a.shape()[1] != b.shape()[0])
        throw ShapeError("gemm inner extents differ: " + a.shape().str() + " * " +
                         b.shape().str());
    TensorT<T> c(Shape{a.shape()[0], b.shape()[1]});
    gemm_buf(a.data(), b.data(), c.data(), a.shape()[0], a.shape()[1], b.shape()[1]);
    return c;
}

// out[NxM] = in[MxN]^T.
template <typename T>
void transpose_buf(const T* in, T* out, int64_t m, int64_t n);

template <typename T>
TensorT<T> transpose(const TensorT<T>& x) {
    if (x.shape().rank != 2) throw ShapeError("transpose expects rank-2 tensor");
    TensorT<T> y(Shape{x.shape()[1], x.shape()[0]});
    transpose_buf(x.data(), y.data(), x.shape()[0], x.shape()[1]);
    return y;
}

// Geometry of a 2d convolution / unfold with square kernel.
struct ConvGeom {
    int64_t channels, in_h, in_w;
    int64_t kernel, stride, pad;
    int64_t out_h, out_w;
};

inline ConvGeom conv_geom(int64_t c, int64_t h, int64_t w, int64_t k, int64_t s, int64_t p) {
    if (k < 1 || s < 1 || p < 0) throw ShapeError("bad conv parameters");
    int64_t eh = h + 2 * p - k;
    int64_t ew = w + 2 * p - k;
    if (eh < 0 || ew < 0 || eh % s != 0 || ew % s != 0)
        throw ShapeError("non-integral convolution output extent for input " +
                         std::to_string(h) + "x" + std::to_string(w) + " k=" +
                         std::to_string(k) + " s=" + std::to_string(s) + " p=" +
                         std::to_string(p));
    return ConvGeom{c, h, w, k, s, p, eh / s + 1, ew / s + 1};
}

// Unfold one image [CxHxW] into columns: column j holds the zero-padded
// receptive field of output position j. Row q of the matrix is written at
// cols + q*row_stride + col_offset, so several samples can share one wide
// column matrix.
template <typename T>
void im2col_into(const T* x, T* cols, const ConvGeom& g, int64_t row_stride,
                 int64_t col_offset);

template <typename T>
void im2col_buf(const T* x, T* cols, const ConvGeom& g) {
    im2col_into(x, cols, g, g.out_h * g.out_w, 0);
}

// Transposed scatter-add of im2col: accumulates dcols (same strided layout)
// back into dx [CxHxW]. dx must be zero-initialised by the caller.
template <typename T>
void col2im_from(const T* dcols, T* dx, const ConvGeom& g, int64_t row_stride,
                 int64_t col_offset);

template <typename T>
void col2im_buf(const T* dcols, T* dx, const ConvGeom& g) {
    col2im_from(dcols, dx, g, g.out_h * g.out_w, 0);
}

template <typename T>
TensorT<T> im2col(const TensorT<T>& x, int64_t k, int64_t s, int64_t p) {
    if (x.shape().rank != 4 || x.shape()[0] != 1)
        throw ShapeError("im2col expects a 1xCxHxW tensor");
    ConvGeom g = conv_geom(x.shape()[1], x.shape()[2], x.shape()[3], k, s, p);
    TensorT<T> cols(Shape{g.channels * k * k, g.out_h * g.out_w});
    im2col_buf(x.data(), cols.data(), g);
    return cols;
}

// Reproducible draws from a seeded stream: uniform in [0,1) or standard
// normal. Values are computed in double and narrowed to T.
template <typename T>
TensorT<T> rng_draw(SeededRng& rng, bool gaussian, int64_t n) {
    if (n < 1) throw ShapeError("rng_draw needs n >= 1");
    TensorT<T> out(Shape{n});
    for (int64_t i = 0; i < n; ++i)
        out[i] = T(gaussian ? rng.gaussian() : rng.uniform());
    return out;
}

} // namespace dnet

#endif
