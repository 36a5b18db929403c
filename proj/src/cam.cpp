#include "dnet/cam.hpp"

#include <cmath>

namespace dnet {

Tensor compute_cam(Model& model, const Tensor& input, int class_index) {
    const int64_t gap = model.find_kind("global_avg_pool");
    if (gap < 0) throw ConfigError("compute_cam: model has no global_avg_pool layer");

    // The head after GAP must be (dropout)? -> dense, and that dense must be
    // the final layer.
    size_t i = size_t(gap) + 1;
    while (i < model.num_layers() && std::string(model.layer(i).kind()) == "dropout") ++i;
    if (i + 1 != model.num_layers() || std::string(model.layer(i).kind()) != "dense")
        throw ConfigError("compute_cam: head is not GAP -> dense");
    auto& dense = dynamic_cast<DenseT<float>&>(model.layer(i));
    auto params = dense.params();
    const Tensor& w = params[0]->value; // [C x K]
    if (class_index < 0 || int64_t(class_index) >= w.shape()[1])
        throw ConfigError("compute_cam: class index out of range");

    if (input.shape().rank != 4 || input.shape()[0] != 1)
        throw ShapeError("compute_cam expects a 1xCxHxW input");
    Model trunk = model.slice(0, size_t(gap)); // layers before GAP
    Tensor f = trunk.forward(input, Mode::eval, nullptr);
    if (f.shape().rank != 4) throw ShapeError("compute_cam: feature maps must be rank 4");
    const int64_t c = f.shape()[1], h = f.shape()[2], ww = f.shape()[3];
    if (c != w.shape()[0])
        throw ShapeError("compute_cam: dense input dim does not match feature channels");

    Tensor map(Shape{h, ww});
    for (int64_t k = 0; k < c; ++k) {
        const float wk = w.at(k, class_index);
        const float* plane = f.data() + k * h * ww;
        for (int64_t j = 0; j < h * ww; ++j) map[j] += wk * plane[j];
    }
    return map;
}

HeatMap normalize_map(const Tensor& raw) {
    if (raw.shape().rank != 2) throw ShapeError("normalize_map expects a rank-2 map");
    HeatMap hm;
    hm.h = raw.shape()[0];
    hm.w = raw.shape()[1];
    hm.values.assign(size_t(raw.numel()), 0.0f);
    float lo = raw[0], hi = raw[0];
    for (int64_t i = 0; i < raw.numel(); ++i) {
        lo = std::min(lo, raw[i]);
        hi = std::max(hi, raw[i]);
    }
    if (hi > lo) {
        const float inv = 1.0f / (hi - lo);
        for (int64_t i = 0; i < raw.numel(); ++i) hm.values[size_t(i)] = (raw[i] - lo) * inv;
    }
    return hm;
}

const std::array<std::array<uint8_t, 3>, 256>& cam_colormap() {
    static const auto table = [] {
        std::array<std::array<uint8_t, 3>, 256> t{};
        for (int i = 0; i < 256; ++i) {
            const double v = double(i) / 255.0;
            double r, g, b;
            if (v < 0.5) { // blue -> green
                const double t2 = v / 0.5;
                r = 0.0;
                g = 255.0 * t2;
                b = 255.0 * (1.0 - t2);
            } else { // green -> red
                const double t2 = (v - 0.5) / 0.5;
                r = 255.0 * t2;
                g = 255.0 * (1.0 - t2);
                b = 0.0;
            }
            t[size_t(i)] = {uint8_t(std::floor(r + 0.5)), uint8_t(std::floor(g + 0.5)),
                            uint8_t(std::floor(b + 0.5))};
        }
        return t;
    }();
    return table;
}

Image render_heatmap_overlay(const Tensor& raw, const Image& original, double alpha) {
    if (alpha < 0.0 || alpha > 1.0)
        throw ConfigError("overlay alpha must be in [0,1], got " + std::to_string(alpha));
    const HeatMap hm = normalize_map(raw);

    std::vector<float> up(size_t(original.width) * size_t(original.height));
    bilinear_resize_plane(hm.values.data(), int(hm.w), int(hm.h), up.data(), original.width,
                          original.height);

    const auto& cmap = cam_colormap();
    Image out(original.width * 2, original.height, 3);
    for (int y = 0; y < original.height; ++y)
        for (int x = 0; x < original.width; ++x) {
            uint8_t gray[3];
            if (original.channels == 3) {
                gray[0] = original.px(x, y, 0);
                gray[1] = original.px(x, y, 1);
                gray[2] = original.px(x, y, 2);
            } else {
                gray[0] = gray[1] = gray[2] = original.px(x, y, 0);
            }
            const float v = std::min(1.0f, std::max(0.0f, up[size_t(y) * size_t(original.width) + size_t(x)]));
            const auto& heat = cmap[size_t(int(std::floor(double(v) * 255.0 + 0.5)))];
            for (int c = 0; c < 3; ++c) {
                out.px(x, y, c) = gray[c];
                const double blend = (1.0 - alpha) * double(gray[c]) + alpha * double(heat[size_t(c)]);
                out.px(x + original.width, y, c) = uint8_t(std::floor(blend + 0.5));
            }
        }
    return out;
}

} // namespace dnet
