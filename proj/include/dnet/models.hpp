#ifndef DNET_MODELS_HPP
#define DNET_MODELS_HPP

#include <string>

#include "dnet/model.hpp"

namespace dnet {

// Stable architecture ids, used by the CLI, CSV output and weight-file
// headers. "mini"/"mini-frozen" are the vgg16 variants at width-mult 1/8
// (the desk-scale default).
struct ArchSpec {
    std::string arch_id = "small-cnn"; // small-cnn | vgg16 | vgg16-frozen | mini | mini-frozen
    int64_t in_channels = 3;
    int64_t height = 250;
    int64_t width = 250;
    double width_mult = 0.0; // <= 0: architecture default (1.0; 0.125 for mini variants)
    int outputs = 1;
    uint64_t seed = 0;
};

bool is_known_arch(const std::string& arch_id);
bool is_frozen_arch(const std::string& arch_id);
double default_width_mult(const std::string& arch_id);

// Channel scaling under width-mult: floor, minimum 8 per layer.
int64_t scale_channels(int64_t base, double width_mult);

// 13 conv layers in the channel pattern (64,64 | 128,128 | 256,256,256 |
// 512,512,512 | 512,512,512) * width-mult, max pooling after each block,
// then GAP -> dense(outputs).
template <typename T>
ModelT<T> build_vgg16(const ArchSpec& spec);

// conv(64)->pool -> conv(128)->pool -> conv(256)->pool -> conv(512)->pool
// -> dropout -> GAP -> dense(512) -> relu -> dense(outputs), widths scaled
// by width-mult; all layers trainable.
template <typename T>
ModelT<T> build_small_cnn(const ArchSpec& spec);

// Dispatch on arch_id; frozen variants are frozen all-but-last-dense.
template <typename T>
ModelT<T> build_model(const ArchSpec& spec);

using ::dnet::Model;

} // namespace dnet

#endif
