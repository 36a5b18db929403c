#ifndef DNET_GRADCHECK_HPP
#define DNET_GRADCHECK_HPP

#include "dnet/model.hpp"

namespace dnet {

struct GradCheckResult {
    double max_rel_err = 0.0;
    int64_t values_checked = 0;
};

// Compares the analytic backward pass of a double-precision model against
// central finite differences of the scalar objective L = sum_j r_j * y_j
// (r fixed random weights), over every input element and every parameter of
// every unfrozen layer. Frozen layers are skipped. Forward passes reuse a
// fixed RNG seed so stochastic layers (dropout) see the same mask on every
// evaluation.
//
// Relative error per value: |a - f| / max(1, |a|, |f|).
GradCheckResult grad_check(ModelT<double>& model, Shape input_shape, uint64_t seed,
                           double epsilon = 1e-5);

// Finite-difference checks of the loss heads' dlogits.
double grad_check_sigmoid_bce(int64_t n, uint64_t seed, double epsilon = 1e-6);
double grad_check_softmax_ce(int64_t n, int64_t k, uint64_t seed, double epsilon = 1e-6);

} // namespace dnet

#endif
