#include "dnet/gradcheck.hpp"

#include <cmath>

namespace dnet {

namespace {

double rel_err(double a, double f) {
    return std::abs(a - f) / std::max({1.0, std::abs(a), std::abs(f)});
}

} // namespace

GradCheckResult grad_check(ModelT<double>& model, Shape input_shape, uint64_t seed,
                           double epsilon) {
    SeededRng gen(seed);
    DTensor x(input_shape);
    for (int64_t i = 0; i < x.numel(); ++i) x[i] = gen.gaussian();

    const uint64_t fwd_seed = gen.next_u64();
    auto forward = [&](const DTensor& in) {
        SeededRng r(fwd_seed);
        return model.forward(in, Mode::train, &r);
    };

    DTensor y0 = forward(x);
    DTensor r(y0.shape());
    for (int64_t i = 0; i < r.numel(); ++i) r[i] = gen.gaussian();

    auto objective = [&](const DTensor& in) {
        DTensor y = forward(in);
        double acc = 0.0;
        for (int64_t i = 0; i < y.numel(); ++i) acc += y[i] * r[i];
        return acc;
    };

    // Analytic gradients. The backward of the last forward(x) is still
    // cached, so run it once more to be explicit about pairing.
    forward(x);
    // dL/dy = r; propagate through every layer (ignore the trainable-prefix
    // shortcut by checking only what backward filled in).
    {
        DTensor cur = r;
        for (int64_t i = int64_t(model.num_layers()) - 1; i >= 0; --i)
            cur = model.layer(size_t(i)).backward(cur);
        // cur now holds dL/dx
        GradCheckResult result;
        const DTensor dx = cur;

        for (int64_t i = 0; i < x.numel(); ++i) {
            DTensor xp = x;
            xp[i] = x[i] + epsilon;
            const double lp = objective(xp);
            xp[i] = x[i] - epsilon;
            const double lm = objective(xp);
            const double fd = (lp - lm) / (2.0 * epsilon);
            result.max_rel_err = std::max(result.max_rel_err, rel_err(dx[i], fd));
            ++result.values_checked;
        }

        for (size_t li = 0; li < model.num_layers(); ++li) {
            auto& layer = model.layer(li);
            if (layer.frozen()) continue; // freeze contract: no gradients to check
            for (auto* p : layer.params()) {
                for (int64_t i = 0; i < p->value.numel(); ++i) {
                    const double orig = p->value[i];
                    p->value[i] = orig + epsilon;
                    const double lp = objective(x);
                    p->value[i] = orig - epsilon;
                    const double lm = objective(x);
                    p->value[i] = orig;
                    const double fd = (lp - lm) / (2.0 * epsilon);
                    result.max_rel_err = std::max(result.max_rel_err, rel_err(p->grad[i], fd));
                    ++result.values_checked;
                }
            }
        }
        return result;
    }
}

double grad_check_sigmoid_bce(int64_t n, uint64_t seed, double epsilon) {
    SeededRng gen(seed);
    DTensor z(Shape{n, 1});
    std::vector<int> labels(static_cast<size_t>(n), 0);
    for (int64_t i = 0; i < n; ++i) {
        z[i] = 2.0 * gen.gaussian();
        labels[size_t(i)] = gen.next_below(2) ? 1 : 0;
    }
    auto res = sigmoid_bce(z, labels);
    double worst = 0.0;
    for (int64_t i = 0; i < n; ++i) {
        DTensor zp = z;
        zp[i] = z[i] + epsilon;
        const double lp = sigmoid_bce(zp, labels).loss;
        zp[i] = z[i] - epsilon;
        const double lm = sigmoid_bce(zp, labels).loss;
        worst = std::max(worst, rel_err(res.dlogits[i], (lp - lm) / (2.0 * epsilon)));
    }
    return worst;
}

double grad_check_softmax_ce(int64_t n, int64_t k, uint64_t seed, double epsilon) {
    SeededRng gen(seed);
    DTensor z(Shape{n, k});
    std::vector<int> labels(static_cast<size_t>(n), 0);
    for (int64_t i = 0; i < z.numel(); ++i) z[i] = 2.0 * gen.gaussian();
    for (int64_t i = 0; i < n; ++i) labels[size_t(i)] = int(gen.next_below(uint64_t(k)));
    auto res = softmax_ce(z, labels);
    double worst = 0.0;
    for (int64_t i = 0; i < z.numel(); ++i) {
        DTensor zp = z;
        zp[i] = z[i] + epsilon;
        const double lp = softmax_ce(zp, labels).loss;
        zp[i] = z[i] - epsilon;
        const double lm = softmax_ce(zp, labels).loss;
        worst = std::max(worst, rel_err(res.dlogits[i], (lp - lm) / (2.0 * epsilon)));
    }
    return worst;
}

} // namespace dnet
