#ifndef DNET_IMAGE_HPP
#define DNET_IMAGE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "dnet/tensor.hpp"

namespace dnet {

// 8-bit image, row-major, interleaved channels (1 = gray, 3 = RGB).
struct Image {
    int width = 0;
    int height = 0;
    int channels = 1;
    std::vector<uint8_t> pixels;

    Image() = default;
    Image(int w, int h, int c, uint8_t fill = 0)
        : width(w), height(h), channels(c), pixels(size_t(w) * size_t(h) * size_t(c), fill) {}

    uint8_t& px(int x, int y, int c = 0) {
        return pixels[(size_t(y) * size_t(width) + size_t(x)) * size_t(channels) + size_t(c)];
    }
    uint8_t px(int x, int y, int c = 0) const {
        return pixels[(size_t(y) * size_t(width) + size_t(x)) * size_t(channels) + size_t(c)];
    }
};

// Binary PGM (P5) / PPM (P6), maxval 255. Comments are tolerated on read and
// never written; write->read round trips are bit-exact.
Image read_pnm(const std::string& path);
void write_pnm(const Image& img, const std::string& path);

// Half-pixel-center sampling with edge clamp; 8-bit results round half up.
Image bilinear_resize(const Image& img, int out_w, int out_h);

// Same sampling convention on a float plane (used for heat-map upsampling).
void bilinear_resize_plane(const float* src, int in_w, int in_h, float* dst, int out_w,
                           int out_h);

// Scales to [0,1], replicates gray to 3 channels or reduces RGB to luma
// (BT.601) as needed; output is 1xCxHxW.
Tensor to_input_tensor(const Image& img, int required_channels);

// Writes the same values directly into a batch row of C*H*W floats.
void fill_input_floats(const Image& img, int required_channels, float* dst);

} // namespace dnet

#endif
