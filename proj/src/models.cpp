#include "dnet/models.hpp"

#include <cmath>

namespace dnet {

bool is_known_arch(const std::string& arch_id) {
    return arch_id == "small-cnn" || arch_id == "vgg16" || arch_id == "vgg16-frozen" ||
           arch_id == "mini" || arch_id == "mini-frozen";
}

bool is_frozen_arch(const std::string& arch_id) {
    return arch_id == "vgg16-frozen" || arch_id == "mini-frozen";
}

double default_width_mult(const std::string& arch_id) {
    return (arch_id == "mini" || arch_id == "mini-frozen") ? 0.125 : 1.0;
}

int64_t scale_channels(int64_t base, double width_mult) {
    return std::max<int64_t>(8, int64_t(std::floor(double(base) * width_mult)));
}

namespace {

double effective_mult(const ArchSpec& spec) {
    return spec.width_mult > 0.0 ? spec.width_mult : default_width_mult(spec.arch_id);
}

} // namespace

template <typename T>
ModelT<T> build_vgg16(const ArchSpec& spec) {
    const double mult = effective_mult(spec);
    static const int64_t kBlocks[5][3] = {
        {64, 64, 0}, {128, 128, 0}, {256, 256, 256}, {512, 512, 512}, {512, 512, 512}};

    ModelT<T> m(spec.arch_id, Shape{spec.in_channels, spec.height, spec.width}, spec.outputs);
    int64_t in_ch = spec.in_channels;
    uint64_t param_layer = 0;
    int64_t last_ch = in_ch;
    for (int b = 0; b < 5; ++b) {
        for (int i = 0; i < 3; ++i) {
            if (kBlocks[b][i] == 0) continue;
            const int64_t out_ch = scale_channels(kBlocks[b][i], mult);
            const std::string tag = std::to_string(b + 1) + "_" + std::to_string(i + 1);
            m.add(std::make_shared<Conv2dT<T>>("conv" + tag, in_ch, out_ch, 3,
                                               child_seed(spec.seed, param_layer++)));
            m.add(std::make_shared<ReluT<T>>("relu" + tag));
            in_ch = out_ch;
            last_ch = out_ch;
        }
        m.add(std::make_shared<MaxPool2x2T<T>>("pool" + std::to_string(b + 1)));
    }
    m.add(std::make_shared<GlobalAvgPoolT<T>>("gap"));
    m.add(std::make_shared<DenseT<T>>("head_fc", last_ch, spec.outputs,
                                      child_seed(spec.seed, param_layer++)));
    return m;
}

template <typename T>
ModelT<T> build_small_cnn(const ArchSpec& spec) {
    const double mult = effective_mult(spec);
    static const int64_t kConvs[4] = {64, 128, 256, 512};

    ModelT<T> m(spec.arch_id, Shape{spec.in_channels, spec.height, spec.width}, spec.outputs);
    int64_t in_ch = spec.in_channels;
    uint64_t param_layer = 0;
    int64_t last_ch = in_ch;
    for (int i = 0; i < 4; ++i) {
        const int64_t out_ch = scale_channels(kConvs[i], mult);
        const std::string tag = std::to_string(i + 1);
        m.add(std::make_shared<Conv2dT<T>>("conv" + tag, in_ch, out_ch, 3,
                                           child_seed(spec.seed, param_layer++)));
        m.add(std::make_shared<ReluT<T>>("relu" + tag));
        m.add(std::make_shared<MaxPool2x2T<T>>("pool" + tag));
        in_ch = out_ch;
        last_ch = out_ch;
    }
    const int64_t hidden = scale_channels(512, mult);
    m.add(std::make_shared<DropoutT<T>>("drop", 0.5));
    m.add(std::make_shared<GlobalAvgPoolT<T>>("gap"));
    m.add(std::make_shared<DenseT<T>>("fc1", last_ch, hidden, child_seed(spec.seed, param_layer++)));
    m.add(std::make_shared<ReluT<T>>("fc1_relu"));
    m.add(std::make_shared<DenseT<T>>("fc2", hidden, spec.outputs,
                                      child_seed(spec.seed, param_layer++)));
    return m;
}

template <typename T>
ModelT<T> build_model(const ArchSpec& spec) {
    if (!is_known_arch(spec.arch_id)) throw ConfigError("unknown arch id: " + spec.arch_id);
    ModelT<T> m = (spec.arch_id == "small-cnn") ? build_small_cnn<T>(spec) : build_vgg16<T>(spec);
    if (is_frozen_arch(spec.arch_id)) freeze_layers(m, FreezePolicy::all_but_last_dense);
    return m;
}

template ModelT<float> build_vgg16<float>(const ArchSpec&);
template ModelT<double> build_vgg16<double>(const ArchSpec&);
template ModelT<float> build_small_cnn<float>(const ArchSpec&);
template ModelT<double> build_small_cnn<double>(const ArchSpec&);
template ModelT<float> build_model<float>(const ArchSpec&);
template ModelT<double> build_model<double>(const ArchSpec&);

} // namespace dnet
