#include "dnet/optim.hpp"

#include <cmath>

namespace dnet {

template <typename T>
AdamT<T>::AdamT(std::vector<ParamT<T>*> params, AdamConfig cfg)
    : params_(std::move(params)), cfg_(cfg) {
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (auto* p : params_) {
        m_.emplace_back(size_t(p->value.numel()), T(0));
        v_.emplace_back(size_t(p->value.numel()), T(0));
    }
}

template <typename T>
void AdamT<T>::step() {
    ++t_;
    const T b1 = T(cfg_.beta1), b2 = T(cfg_.beta2);
    const T corr1 = T(1.0 - std::pow(cfg_.beta1, double(t_)));
    const T corr2 = T(1.0 - std::pow(cfg_.beta2, double(t_)));
    const T lr = T(cfg_.lr), eps = T(cfg_.eps);
    for (size_t pi = 0; pi < params_.size(); ++pi) {
        ParamT<T>& p = *params_[pi];
        T* m = m_[pi].data();
        T* v = v_[pi].data();
        const T* g = p.grad.data();
        T* w = p.value.data();
        const int64_t n = p.value.numel();
        for (int64_t i = 0; i < n; ++i) {
            m[i] = b1 * m[i] + (T(1) - b1) * g[i];
            v[i] = b2 * v[i] + (T(1) - b2) * g[i] * g[i];
            const T mhat = m[i] / corr1;
            const T vhat = v[i] / corr2;
            w[i] -= lr * mhat / (std::sqrt(vhat) + eps);
        }
    }
}

template <typename T>
SgdT<T>::SgdT(std::vector<ParamT<T>*> params, SgdConfig cfg)
    : params_(std::move(params)), cfg_(cfg) {
    velocity_.reserve(params_.size());
    for (auto* p : params_)
        velocity_.emplace_back(size_t(p->value.numel()), T(0));
}

template <typename T>
void SgdT<T>::step() {
    const T lr = T(cfg_.lr), mu = T(cfg_.momentum);
    for (size_t pi = 0; pi < params_.size(); ++pi) {
        ParamT<T>& p = *params_[pi];
        T* vel = velocity_[pi].data();
        const T* g = p.grad.data();
        T* w = p.value.data();
        const int64_t n = p.value.numel();
        for (int64_t i = 0; i < n; ++i) {
            vel[i] = mu * vel[i] + g[i];
            w[i] -= lr * vel[i];
        }
    }
}

template class AdamT<float>;
template class AdamT<double>;
template class SgdT<float>;
template class SgdT<double>;

} // namespace dnet
