#ifndef DNET_OPTIM_HPP
#define DNET_OPTIM_HPP

#include <vector>

#include "dnet/layers.hpp"

namespace dnet {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct SgdConfig {
    double lr = 0.01;
    double momentum = 0.0;
};

// Optimizers bind to a fixed parameter list (the model's trainable set) at
// construction; state buffers are aligned with that list.
template <typename T>
class AdamT {
public:
    AdamT(std::vector<ParamT<T>*> params, AdamConfig cfg);
    void step(); // standard bias-corrected update from each param's .grad
    int64_t steps_taken() const { return t_; }

private:
    std::vector<ParamT<T>*> params_;
    AdamConfig cfg_;
    std::vector<std::vector<T>> m_, v_;
    int64_t t_ = 0;
};

template <typename T>
class SgdT {
public:
    SgdT(std::vector<ParamT<T>*> params, SgdConfig cfg);
    void step();

private:
    std::vector<ParamT<T>*> params_;
    SgdConfig cfg_;
    std::vector<std::vector<T>> velocity_;
};

using Adam = AdamT<float>;
using Sgd = SgdT<float>;

} // namespace dnet

#endif
