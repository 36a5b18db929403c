#ifndef DNET_LAYERS_HPP
#define DNET_LAYERS_HPP

#include <memory>
#include <string>
#include <vector>

#include "dnet/tensor.hpp"

namespace dnet {

enum class Mode { train, eval };

template <typename T>
struct ParamT {
    std::string name; // "<layer>.W" / "<layer>.b"
    TensorT<T> value;
    TensorT<T> grad;
};

// A layer owns its parameters, caches whatever forward state its backward
// pass needs, and writes parameter gradients on backward unless frozen.
// backward may only be called after forward on the same batch.
template <typename T>
class LayerT {
public:
    explicit LayerT(std::string name) : name_(std::move(name)) {}
    virtual ~LayerT() = default;

    const std::string& name() const { return name_; }
    bool frozen() const { return frozen_; }
    void set_frozen(bool f) { frozen_ = f; }

    virtual const char* kind() const = 0;
    virtual TensorT<T> forward(const TensorT<T>& x, Mode mode, SeededRng* rng) = 0;
    virtual TensorT<T> backward(const TensorT<T>& dy) = 0;
    virtual std::vector<ParamT<T>*> params() { return {}; }

protected:
    std::string name_;
    bool frozen_ = false;
};

// Square-kernel cross-correlation plus bias, stride 1, "same" zero padding
// (pad = kernel/2). Implemented as im2col + GEMM per sample.
template <typename T>
class Conv2dT : public LayerT<T> {
public:
    Conv2dT(std::string name, int64_t in_ch, int64_t out_ch, int64_t kernel, uint64_t init_seed);

    const char* kind() const override { return "conv2d"; }
    TensorT<T> forward(const TensorT<T>& x, Mode mode, SeededRng* rng) override;
    TensorT<T> backward(const TensorT<T>& dy) override;
    std::vector<ParamT<T>*> params() override { return {&w_, &b_}; }

    int64_t in_channels() const { return in_ch_; }
    int64_t out_channels() const { return out_ch_; }
    int64_t kernel() const { return kernel_; }

private:
    int64_t in_ch_, out_ch_, kernel_, pad_;
    ParamT<T> w_; // [Co x Ci x k x k]
    ParamT<T> b_; // [Co]
    TensorT<T> cached_x_;
};

template <typename T>
class ReluT : public LayerT<T> {
public:
    explicit ReluT(std::string name) : LayerT<T>(std::move(name)) {}
    const char* kind() const override { return "relu"; }
    TensorT<T> forward(const TensorT<T>& x, Mode mode, SeededRng* rng) override;
    TensorT<T> backward(const TensorT<T>& dy) override;

private:
    TensorT<T> cached_x_;
};

// 2x2 window, stride 2. Odd spatial extents are zero-padded by one
// row/column on the bottom/right before pooling. Window ties resolve to the
// first occurrence in row-major order; gradients to padding cells are
// dropped.
template <typename T>
class MaxPool2x2T : public LayerT<T> {
public:
    explicit MaxPool2x2T(std::string name) : LayerT<T>(std::move(name)) {}
    const char* kind() const override { return "maxpool2x2"; }
    TensorT<T> forward(const TensorT<T>& x, Mode mode, SeededRng* rng) override;
    TensorT<T> backward(const TensorT<T>& dy) override;

private:
    Shape in_shape_;
    std::vector<int64_t> argmax_; // flat input index per output element; -1 = padding won
};

// Inverted dropout: train mode zeroes each element with probability `rate`
// and scales survivors by 1/(1-rate); eval mode is the identity.
template <typename T>
class DropoutT : public LayerT<T> {
public:
    DropoutT(std::string name, double rate);
    const char* kind() const override { return "dropout"; }
    TensorT<T> forward(const TensorT<T>& x, Mode mode, SeededRng* rng) override;
    TensorT<T> backward(const TensorT<T>& dy) override;
    double rate() const { return rate_; }

private:
    double rate_;
    bool last_train_ = false;
    std::vector<uint8_t> keep_;
};

// Per-channel spatial mean: [NxCxHxW] -> [NxC].
template <typename T>
class GlobalAvgPoolT : public LayerT<T> {
public:
    explicit GlobalAvgPoolT(std::string name) : LayerT<T>(std::move(name)) {}
    const char* kind() const override { return "global_avg_pool"; }
    TensorT<T> forward(const TensorT<T>& x, Mode mode, SeededRng* rng) override;
    TensorT<T> backward(const TensorT<T>& dy) override;

private:
    Shape in_shape_;
};

// y[NxO] = x[NxF] * W[FxO] + b.
template <typename T>
class DenseT : public LayerT<T> {
public:
    DenseT(std::string name, int64_t in_features, int64_t out_features, uint64_t init_seed);
    const char* kind() const override { return "dense"; }
    TensorT<T> forward(const TensorT<T>& x, Mode mode, SeededRng* rng) override;
    TensorT<T> backward(const TensorT<T>& dy) override;
    std::vector<ParamT<T>*> params() override { return {&w_, &b_}; }

    int64_t in_features() const { return in_f_; }
    int64_t out_features() const { return out_f_; }

private:
    int64_t in_f_, out_f_;
    ParamT<T> w_; // [F x O]
    ParamT<T> b_; // [O]
    TensorT<T> cached_x_;
};

// Glorot-uniform fill: limit = sqrt(6 / (fan_in + fan_out)).
template <typename T>
void glorot_uniform(TensorT<T>& w, int64_t fan_in, int64_t fan_out, uint64_t seed);

template <typename T>
struct LossResult {
    double loss;
    TensorT<T> dlogits;
};

// Mean binary cross-entropy over the batch from raw logits [Nx1], computed
// in the log-sum-exp form so extreme logits stay finite.
// dlogit = (sigmoid(z) - y) / N.
template <typename T>
LossResult<T> sigmoid_bce(const TensorT<T>& logits, const std::vector<int>& labels);

// Mean softmax cross-entropy from logits [NxK] and class indices.
template <typename T>
LossResult<T> softmax_ce(const TensorT<T>& logits, const std::vector<int>& labels);

using Layer = LayerT<float>;
using Param = ParamT<float>;
using Conv2d = Conv2dT<float>;
using Relu = ReluT<float>;
using MaxPool2x2 = MaxPool2x2T<float>;
using Dropout = DropoutT<float>;
using GlobalAvgPool = GlobalAvgPoolT<float>;
using Dense = DenseT<float>;

} // namespace dnet

#endif
