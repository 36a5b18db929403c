#include "dnet/layers.hpp"

#include <algorithm>
#include <cmath>

namespace dnet {

template <typename T>
void glorot_uniform(TensorT<T>& w, int64_t fan_in, int64_t fan_out, uint64_t seed) {
    SeededRng rng(seed);
    const double limit = std::sqrt(6.0 / double(fan_in + fan_out));
    for (int64_t i = 0; i < w.numel(); ++i)
        w[i] = T((2.0 * rng.uniform() - 1.0) * limit);
}

// ---------------------------------------------------------------- conv2d --

template <typename T>
Conv2dT<T>::Conv2dT(std::string name, int64_t in_ch, int64_t out_ch, int64_t kernel,
                    uint64_t init_seed)
    : LayerT<T>(std::move(name)), in_ch_(in_ch), out_ch_(out_ch), kernel_(kernel),
      pad_(kernel / 2) {
    if (kernel < 1 || kernel % 2 == 0)
        throw ShapeError("conv kernel must be odd, got " + std::to_string(kernel));
    w_.name = this->name_ + ".W";
    w_.value = TensorT<T>(Shape{out_ch, in_ch, kernel, kernel});
    w_.grad = TensorT<T>(w_.value.shape());
    glorot_uniform(w_.value, in_ch * kernel * kernel, out_ch * kernel * kernel, init_seed);
    b_.name = this->name_ + ".b";
    b_.value = TensorT<T>(Shape{out_ch});
    b_.grad = TensorT<T>(b_.value.shape());
}

namespace {

// Samples whose unfolded columns are processed in one GEMM. Deep layers
// have few output positions per sample, so several samples are merged until
// the GEMM is ~4096 columns wide (keeping the column buffer cache-sized).
// The chunk size is a pure function of the shapes, so results are identical
// run to run.
int64_t conv_chunk(int64_t n, int64_t hw) {
    const int64_t target_width = 4096;
    return std::max<int64_t>(1, std::min(n, target_width / std::max<int64_t>(1, hw)));
}

} // namespace

template <typename T>
TensorT<T> Conv2dT<T>::forward(const TensorT<T>& x, Mode mode, SeededRng*) {
    if (x.shape().rank != 4 || x.shape()[1] != in_ch_)
        throw ShapeError("conv2d " + this->name_ + ": expected NxCxHxW with C=" +
                         std::to_string(in_ch_) + ", got " + x.shape().str());
    const int64_t n = x.shape()[0], h = x.shape()[2], w = x.shape()[3];
    const ConvGeom g = conv_geom(in_ch_, h, w, kernel_, 1, pad_);
    const int64_t ckk = in_ch_ * kernel_ * kernel_;
    const int64_t hw = g.out_h * g.out_w;
    const int64_t chunk = conv_chunk(n, hw);

    if (mode == Mode::train) cached_x_ = x;
    TensorT<T> y(Shape{n, out_ch_, g.out_h, g.out_w});
    std::vector<T> cols(size_t(ckk * chunk * hw));
    std::vector<T> ytmp(size_t(out_ch_ * chunk * hw));
    for (int64_t base = 0; base < n; base += chunk) {
        const int64_t cnt = std::min(chunk, n - base);
        const int64_t width = cnt * hw;
#pragma omp parallel for schedule(static)
        for (int64_t s = 0; s < cnt; ++s)
            im2col_into(x.data() + (base + s) * in_ch_ * h * w, cols.data(), g, width, s * hw);
        gemm_buf(w_.value.data(), cols.data(), ytmp.data(), out_ch_, ckk, width);
#pragma omp parallel for schedule(static)
        for (int64_t sc = 0; sc < cnt * out_ch_; ++sc) {
            const int64_t s = sc / out_ch_, co = sc % out_ch_;
            const T bias = b_.value[co];
            const T* src = ytmp.data() + co * width + s * hw;
            T* dst = y.data() + ((base + s) * out_ch_ + co) * hw;
            for (int64_t j = 0; j < hw; ++j) dst[j] = src[j] + bias;
        }
    }
    return y;
}

template <typename T>
TensorT<T> Conv2dT<T>::backward(const TensorT<T>& dy) {
    const TensorT<T>& x = cached_x_;
    const int64_t n = x.shape()[0], h = x.shape()[2], w = x.shape()[3];
    const ConvGeom g = conv_geom(in_ch_, h, w, kernel_, 1, pad_);
    const int64_t ckk = in_ch_ * kernel_ * kernel_;
    const int64_t hw = g.out_h * g.out_w;
    if (dy.shape() != Shape{n, out_ch_, g.out_h, g.out_w})
        throw ShapeError("conv2d backward: dy shape " + dy.shape().str());
    const int64_t chunk = conv_chunk(n, hw);

    const bool want_grads = !this->frozen_;
    if (want_grads) {
        w_.grad.fill(T(0));
        b_.grad.fill(T(0));
    }

    TensorT<T> dx(x.shape());
    TensorT<T> wT(Shape{ckk, out_ch_});
    transpose_buf(w_.value.data(), wT.data(), out_ch_, ckk);

    std::vector<T> cols(size_t(want_grads ? ckk * chunk * hw : 0));
    std::vector<T> colsT(size_t(want_grads ? ckk * chunk * hw : 0));
    std::vector<T> dw_chunk(size_t(want_grads ? out_ch_ * ckk : 0));
    std::vector<T> dy_all(size_t(out_ch_ * chunk * hw));
    std::vector<T> dcols(size_t(ckk * chunk * hw));

    for (int64_t base = 0; base < n; base += chunk) {
        const int64_t cnt = std::min(chunk, n - base);
        const int64_t width = cnt * hw;
#pragma omp parallel for schedule(static)
        for (int64_t sc = 0; sc < cnt * out_ch_; ++sc) {
            const int64_t s = sc / out_ch_, co = sc % out_ch_;
            const T* src = dy.data() + ((base + s) * out_ch_ + co) * hw;
            T* dst = dy_all.data() + co * width + s * hw;
            for (int64_t j = 0; j < hw; ++j) dst[j] = src[j];
        }
        if (want_grads) {
#pragma omp parallel for schedule(static)
            for (int64_t s = 0; s < cnt; ++s)
                im2col_into(x.data() + (base + s) * in_ch_ * h * w, cols.data(), g, width,
                            s * hw);
            transpose_buf(cols.data(), colsT.data(), ckk, width);
            gemm_buf(dy_all.data(), colsT.data(), dw_chunk.data(), out_ch_, width, ckk);
            for (int64_t j = 0; j < out_ch_ * ckk; ++j) w_.grad[j] += dw_chunk[j];
            for (int64_t co = 0; co < out_ch_; ++co) {
                T acc = T(0);
                const T* row = dy_all.data() + co * width;
                for (int64_t j = 0; j < width; ++j) acc += row[j];
                b_.grad[co] += acc;
            }
        }
        gemm_buf(wT.data(), dy_all.data(), dcols.data(), ckk, out_ch_, width);
#pragma omp parallel for schedule(static)
        for (int64_t s = 0; s < cnt; ++s)
            col2im_from(dcols.data(), dx.data() + (base + s) * in_ch_ * h * w, g, width,
                        s * hw);
    }
    return dx;
}

// ------------------------------------------------------------------ relu --

template <typename T>
TensorT<T> ReluT<T>::forward(const TensorT<T>& x, Mode mode, SeededRng*) {
    if (mode == Mode::train) cached_x_ = x;
    TensorT<T> y(x.shape());
    const T* in = x.data();
    T* out = y.data();
    const int64_t n = x.numel();
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < n; ++i) out[i] = in[i] > T(0) ? in[i] : T(0);
    return y;
}

template <typename T>
TensorT<T> ReluT<T>::backward(const TensorT<T>& dy) {
    if (dy.shape() != cached_x_.shape()) throw ShapeError("relu backward shape mismatch");
    TensorT<T> dx(dy.shape());
    for (int64_t i = 0; i < dy.numel(); ++i)
        dx[i] = cached_x_[i] > T(0) ? dy[i] : T(0);
    return dx;
}

// ------------------------------------------------------------ maxpool2x2 --

template <typename T>
TensorT<T> MaxPool2x2T<T>::forward(const TensorT<T>& x, Mode mode, SeededRng*) {
    if (x.shape().rank != 4) throw ShapeError("maxpool2x2 expects NxCxHxW");
    in_shape_ = x.shape();
    const int64_t n = x.shape()[0], c = x.shape()[1], h = x.shape()[2], w = x.shape()[3];
    const int64_t ph = (h + 1) / 2, pw = (w + 1) / 2;
    TensorT<T> y(Shape{n, c, ph, pw});
    const bool track = (mode == Mode::train);
    if (track) argmax_.assign(size_t(y.numel()), -1);

    const int64_t planes = n * c;
#pragma omp parallel for schedule(static)
    for (int64_t p = 0; p < planes; ++p) {
        const T* in = x.data() + p * h * w;
        T* out = y.data() + p * ph * pw;
        int64_t* arg = track ? argmax_.data() + p * ph * pw : nullptr;
        for (int64_t oy = 0; oy < ph; ++oy)
            for (int64_t ox = 0; ox < pw; ++ox) {
                T best = T(0); // value of padding cells
                int64_t best_idx = -1;
                bool first = true;
                for (int64_t dy2 = 0; dy2 < 2; ++dy2)
                    for (int64_t dx2 = 0; dx2 < 2; ++dx2) {
                        const int64_t iy = oy * 2 + dy2, ix = ox * 2 + dx2;
                        const bool padded = (iy >= h || ix >= w);
                        const T v = padded ? T(0) : in[iy * w + ix];
                        if (first || v > best) {
                            best = v;
                            best_idx = padded ? -1 : iy * w + ix;
                            first = false;
                        }
                    }
                out[oy * pw + ox] = best;
                if (track) arg[oy * pw + ox] = best_idx;
            }
    }
    return y;
}

template <typename T>
TensorT<T> MaxPool2x2T<T>::backward(const TensorT<T>& dy) {
    const int64_t n = in_shape_[0], c = in_shape_[1], h = in_shape_[2], w = in_shape_[3];
    const int64_t ph = (h + 1) / 2, pw = (w + 1) / 2;
    if (dy.shape() != Shape{n, c, ph, pw}) throw ShapeError("maxpool backward shape mismatch");
    TensorT<T> dx(in_shape_);
    const int64_t planes = n * c;
    for (int64_t p = 0; p < planes; ++p) {
        const T* g = dy.data() + p * ph * pw;
        T* out = dx.data() + p * h * w;
        const int64_t* arg = argmax_.data() + p * ph * pw;
        for (int64_t j = 0; j < ph * pw; ++j)
            if (arg[j] >= 0) out[arg[j]] += g[j];
    }
    return dx;
}

// --------------------------------------------------------------- dropout --

template <typename T>
DropoutT<T>::DropoutT(std::string name, double rate)
    : LayerT<T>(std::move(name)), rate_(rate) {
    if (rate < 0.0 || rate >= 1.0)
        throw ConfigError("dropout rate must be in [0,1), got " + std::to_string(rate));
}

template <typename T>
TensorT<T> DropoutT<T>::forward(const TensorT<T>& x, Mode mode, SeededRng* rng) {
    last_train_ = (mode == Mode::train && rate_ > 0.0);
    if (!last_train_) return x;
    if (!rng) throw ConfigError("dropout in train mode needs an RNG");
    TensorT<T> y(x.shape());
    keep_.assign(size_t(x.numel()), 1);
    const T scale = T(1.0 / (1.0 - rate_));
    for (int64_t i = 0; i < x.numel(); ++i) {
        if (rng->uniform() < rate_) {
            keep_[size_t(i)] = 0;
            y[i] = T(0);
        } else {
            y[i] = x[i] * scale;
        }
    }
    return y;
}

template <typename T>
TensorT<T> DropoutT<T>::backward(const TensorT<T>& dy) {
    if (!last_train_) return dy;
    TensorT<T> dx(dy.shape());
    const T scale = T(1.0 / (1.0 - rate_));
    for (int64_t i = 0; i < dy.numel(); ++i)
        dx[i] = keep_[size_t(i)] ? dy[i] * scale : T(0);
    return dx;
}

// ------------------------------------------------------- global_avg_pool --

template <typename T>
TensorT<T> GlobalAvgPoolT<T>::forward(const TensorT<T>& x, Mode, SeededRng*) {
    if (x.shape().rank != 4) throw ShapeError("global_avg_pool expects NxCxHxW");
    in_shape_ = x.shape();
    const int64_t n = x.shape()[0], c = x.shape()[1], hw = x.shape()[2] * x.shape()[3];
    TensorT<T> y(Shape{n, c});
    for (int64_t p = 0; p < n * c; ++p) {
        const T* in = x.data() + p * hw;
        T acc = T(0);
        for (int64_t j = 0; j < hw; ++j) acc += in[j];
        y[p] = acc / T(hw);
    }
    return y;
}

template <typename T>
TensorT<T> GlobalAvgPoolT<T>::backward(const TensorT<T>& dy) {
    const int64_t n = in_shape_[0], c = in_shape_[1], hw = in_shape_[2] * in_shape_[3];
    if (dy.shape() != Shape{n, c}) throw ShapeError("global_avg_pool backward shape mismatch");
    TensorT<T> dx(in_shape_);
    for (int64_t p = 0; p < n * c; ++p) {
        const T g = dy[p] / T(hw);
        T* out = dx.data() + p * hw;
        for (int64_t j = 0; j < hw; ++j) out[j] = g;
    }
    return dx;
}

// ----------------------------------------------------------------- dense --

template <typename T>
DenseT<T>::DenseT(std::string name, int64_t in_features, int64_t out_features,
                  uint64_t init_seed)
    : LayerT<T>(std::move(name)), in_f_(in_features), out_f_(out_features) {
    w_.name = this->name_ + ".W";
    w_.value = TensorT<T>(Shape{in_f_, out_f_});
    w_.grad = TensorT<T>(w_.value.shape());
    glorot_uniform(w_.value, in_f_, out_f_, init_seed);
    b_.name = this->name_ + ".b";
    b_.value = TensorT<T>(Shape{out_f_});
    b_.grad = TensorT<T>(b_.value.shape());
}

template <typename T>
TensorT<T> DenseT<T>::forward(const TensorT<T>& x, Mode mode, SeededRng*) {
    if (x.shape().rank != 2 || x.shape()[1] != in_f_)
        throw ShapeError("dense " + this->name_ + ": expected NxF with F=" +
                         std::to_string(in_f_) + ", got " + x.shape().str());
    if (mode == Mode::train) cached_x_ = x;
    const int64_t n = x.shape()[0];
    TensorT<T> y(Shape{n, out_f_});
    gemm_buf(x.data(), w_.value.data(), y.data(), n, in_f_, out_f_);
    for (int64_t i = 0; i < n; ++i) {
        T* row = y.data() + i * out_f_;
        for (int64_t o = 0; o < out_f_; ++o) row[o] += b_.value[o];
    }
    return y;
}

template <typename T>
TensorT<T> DenseT<T>::backward(const TensorT<T>& dy) {
    const int64_t n = cached_x_.shape()[0];
    if (dy.shape() != Shape{n, out_f_}) throw ShapeError("dense backward shape mismatch");

    if (!this->frozen_) {
        TensorT<T> xT(Shape{in_f_, n});
        transpose_buf(cached_x_.data(), xT.data(), n, in_f_);
        gemm_buf(xT.data(), dy.data(), w_.grad.data(), in_f_, n, out_f_);
        b_.grad.fill(T(0));
        for (int64_t i = 0; i < n; ++i) {
            const T* row = dy.data() + i * out_f_;
            for (int64_t o = 0; o < out_f_; ++o) b_.grad[o] += row[o];
        }
    }
    TensorT<T> wT(Shape{out_f_, in_f_});
    transpose_buf(w_.value.data(), wT.data(), in_f_, out_f_);
    TensorT<T> dx(Shape{n, in_f_});
    gemm_buf(dy.data(), wT.data(), dx.data(), n, out_f_, in_f_);
    return dx;
}

// ---------------------------------------------------------------- losses --

template <typename T>
LossResult<T> sigmoid_bce(const TensorT<T>& logits, const std::vector<int>& labels) {
    if (logits.shape().rank != 2 || logits.shape()[1] != 1)
        throw ShapeError("sigmoid_bce expects Nx1 logits, got " + logits.shape().str());
    const int64_t n = logits.shape()[0];
    if (int64_t(labels.size()) != n) throw ShapeError("sigmoid_bce label count mismatch");
    LossResult<T> r{0.0, TensorT<T>(logits.shape())};
    double total = 0.0;
    for (int64_t i = 0; i < n; ++i) {
        const double z = double(logits[i]);
        const double y = labels[size_t(i)] ? 1.0 : 0.0;
        // max(z,0) - z*y + log(1 + exp(-|z|))
        total += std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
        const double s = 1.0 / (1.0 + std::exp(-z));
        r.dlogits[i] = T((s - y) / double(n));
    }
    r.loss = total / double(n);
    return r;
}

template <typename T>
LossResult<T> softmax_ce(const TensorT<T>& logits, const std::vector<int>& labels) {
    if (logits.shape().rank != 2) throw ShapeError("softmax_ce expects NxK logits");
    const int64_t n = logits.shape()[0], k = logits.shape()[1];
    if (int64_t(labels.size()) != n) throw ShapeError("softmax_ce label count mismatch");
    LossResult<T> r{0.0, TensorT<T>(logits.shape())};
    double total = 0.0;
    for (int64_t i = 0; i < n; ++i) {
        const int y = labels[size_t(i)];
        if (y < 0 || y >= k) throw ShapeError("softmax_ce label out of range");
        const T* row = logits.data() + i * k;
        double m = double(row[0]);
        for (int64_t j = 1; j < k; ++j) m = std::max(m, double(row[j]));
        double sum = 0.0;
        for (int64_t j = 0; j < k; ++j) sum += std::exp(double(row[j]) - m);
        const double lse = m + std::log(sum);
        total += lse - double(row[y]);
        T* drow = r.dlogits.data() + i * k;
        for (int64_t j = 0; j < k; ++j) {
            const double p = std::exp(double(row[j]) - lse);
            drow[j] = T((p - (j == y ? 1.0 : 0.0)) / double(n));
        }
    }
    r.loss = total / double(n);
    return r;
}

template class Conv2dT<float>;
template class Conv2dT<double>;
template class ReluT<float>;
template class ReluT<double>;
template class MaxPool2x2T<float>;
template class MaxPool2x2T<double>;
template class DropoutT<float>;
template class DropoutT<double>;
template class GlobalAvgPoolT<float>;
template class GlobalAvgPoolT<double>;
template class DenseT<float>;
template class DenseT<double>;
template void glorot_uniform<float>(TensorT<float>&, int64_t, int64_t, uint64_t);
template void glorot_uniform<double>(TensorT<double>&, int64_t, int64_t, uint64_t);
template LossResult<float> sigmoid_bce<float>(const TensorT<float>&, const std::vector<int>&);
template LossResult<double> sigmoid_bce<double>(const TensorT<double>&, const std::vector<int>&);
template LossResult<float> softmax_ce<float>(const TensorT<float>&, const std::vector<int>&);
template LossResult<double> softmax_ce<double>(const TensorT<double>&, const std::vector<int>&);

} // namespace dnet
