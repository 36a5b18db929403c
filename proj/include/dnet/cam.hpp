#ifndef DNET_CAM_HPP
#define DNET_CAM_HPP

#include <array>

#include "dnet/image.hpp"
#include "dnet/model.hpp"

namespace dnet {

// Class activation map over a GAP-headed model: M(x,y) = sum_k w[k,c] *
// f_k(x,y), where f_k are the feature maps entering GAP (eval mode) and
// w[.,c] the final dense weights into output c. Bias excluded; negative
// values retained. Requires the head to be GAP (optionally followed by
// dropout) -> one dense layer; anything else errors.
Tensor compute_cam(Model& model, const Tensor& input, int class_index);

// Min-max normalised copy in [0,1]; a constant map becomes all zeros.
struct HeatMap {
    int64_t h = 0, w = 0;
    std::vector<float> values;
};
HeatMap normalize_map(const Tensor& raw);

// 256-entry piecewise-linear blue -> green -> red map (table documented at
// docs/cam_colormap.txt).
const std::array<std::array<uint8_t, 3>, 256>& cam_colormap();

// Side-by-side panel (2W x H RGB): original on the left, overlay on the
// right. The raw map is min-max normalised, bilinearly upsampled to the
// image size, colorised, and alpha-blended over the gray->RGB input.
Image render_heatmap_overlay(const Tensor& raw, const Image& original, double alpha = 0.4);

} // namespace dnet

#endif
