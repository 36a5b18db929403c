#ifndef DNET_MODEL_HPP
#define DNET_MODEL_HPP

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "dnet/layers.hpp"

namespace dnet {

// Named, ordered layer graph. Layers are shared so a sub-range view (e.g.
// the classifier head) can train the same parameter storage in place.
template <typename T>
class ModelT {
public:
    ModelT() = default;
    ModelT(std::string arch_id, Shape input_shape, int outputs)
        : arch_id_(std::move(arch_id)), input_shape_(input_shape), outputs_(outputs) {}

    const std::string& arch_id() const { return arch_id_; }
    const Shape& input_shape() const { return input_shape_; }
    int outputs() const { return outputs_; }

    void add(std::shared_ptr<LayerT<T>> layer) {
        for (const auto& l : layers_)
            if (l->name() == layer->name())
                throw ConfigError("duplicate layer name " + layer->name());
        layers_.push_back(std::move(layer));
    }

    size_t num_layers() const { return layers_.size(); }
    LayerT<T>& layer(size_t i) { return *layers_[i]; }
    const LayerT<T>& layer(size_t i) const { return *layers_[i]; }
    const std::vector<std::shared_ptr<LayerT<T>>>& layers() const { return layers_; }

    LayerT<T>* find_layer(const std::string& name) {
        for (auto& l : layers_)
            if (l->name() == name) return l.get();
        return nullptr;
    }

    // Index of the first layer of the given kind, or -1.
    int64_t find_kind(const char* kind) const {
        for (size_t i = 0; i < layers_.size(); ++i)
            if (std::string(layers_[i]->kind()) == kind) return int64_t(i);
        return -1;
    }

    TensorT<T> forward(const TensorT<T>& x, Mode mode, SeededRng* rng) {
        TensorT<T> cur = x;
        for (auto& l : layers_) cur = l->forward(cur, mode, rng);
        return cur;
    }

    // Backpropagates dy through all layers (or stops early once no trainable
    // parameters remain upstream, which cannot change any gradient that is
    // still wanted).
    void backward(const TensorT<T>& dy) {
        int64_t lowest_trainable = -1;
        for (size_t i = 0; i < layers_.size(); ++i)
            if (!layers_[i]->frozen() && !layers_[i]->params().empty()) {
                lowest_trainable = int64_t(i);
                break;
            }
        TensorT<T> cur = dy;
        for (int64_t i = int64_t(layers_.size()) - 1; i >= 0; --i) {
            if (lowest_trainable < 0 || i < lowest_trainable) break;
            cur = layers_[size_t(i)]->backward(cur);
        }
    }

    std::vector<ParamT<T>*> params() {
        std::vector<ParamT<T>*> out;
        for (auto& l : layers_)
            for (auto* p : l->params()) out.push_back(p);
        return out;
    }

    std::vector<ParamT<T>*> trainable_params() {
        std::vector<ParamT<T>*> out;
        for (auto& l : layers_) {
            if (l->frozen()) continue;
            for (auto* p : l->params()) out.push_back(p);
        }
        return out;
    }

    // View over layers [begin, end); shares the underlying layer objects.
    ModelT slice(size_t begin, size_t end) const {
        if (begin > end || end > layers_.size()) throw ConfigError("bad model slice range");
        ModelT m(arch_id_ + "#slice", input_shape_, outputs_);
        for (size_t i = begin; i < end; ++i) m.layers_.push_back(layers_[i]);
        return m;
    }

private:
    std::string arch_id_;
    Shape input_shape_; // per-example (C,H,W)
    int outputs_ = 1;
    std::vector<std::shared_ptr<LayerT<T>>> layers_;
};

using Model = ModelT<float>;

template <typename T>
struct SnapshotT {
    std::vector<std::pair<std::string, TensorT<T>>> entries;
};
using Snapshot = SnapshotT<float>;

template <typename T>
SnapshotT<T> snapshot(ModelT<T>& model) {
    SnapshotT<T> s;
    for (auto* p : model.params()) s.entries.emplace_back(p->name, p->value);
    return s;
}

// Makes every parameter bitwise equal to the snapshot copy. Errors if the
// snapshot does not match the model's parameter list.
template <typename T>
void restore(ModelT<T>& model, const SnapshotT<T>& snap) {
    auto params = model.params();
    if (params.size() != snap.entries.size())
        throw ConfigError("snapshot/model parameter count mismatch");
    for (size_t i = 0; i < params.size(); ++i) {
        const auto& [name, value] = snap.entries[i];
        if (params[i]->name != name || params[i]->value.shape() != value.shape())
            throw ConfigError("snapshot entry " + name + " does not match parameter " +
                              params[i]->name);
        params[i]->value = value;
    }
}

struct ParamCounts {
    int64_t total = 0;
    int64_t trainable = 0;
};

template <typename T>
ParamCounts count_params(ModelT<T>& model) {
    ParamCounts c;
    for (auto& l : model.layers())
        for (auto* p : l->params()) {
            c.total += p->value.numel();
            if (!l->frozen()) c.trainable += p->value.numel();
        }
    return c;
}

enum class FreezePolicy { none, all_but_last_dense, by_name };

// all_but_last_dense: every parameterised layer except the final dense layer
// is frozen ("train only the last layer"). by_name freezes the given layers
// and errors on unknown names.
template <typename T>
void freeze_layers(ModelT<T>& model, FreezePolicy policy,
                   const std::vector<std::string>& names = {}) {
    switch (policy) {
    case FreezePolicy::none:
        for (auto& l : model.layers()) l->set_frozen(false);
        return;
    case FreezePolicy::all_but_last_dense: {
        int64_t last_dense = -1;
        for (size_t i = 0; i < model.num_layers(); ++i)
            if (std::string(model.layer(i).kind()) == "dense") last_dense = int64_t(i);
        if (last_dense < 0) throw ConfigError("freeze policy needs a dense layer");
        for (size_t i = 0; i < model.num_layers(); ++i)
            model.layer(i).set_frozen(int64_t(i) != last_dense);
        return;
    }
    case FreezePolicy::by_name:
        for (const auto& n : names)
            if (!model.find_layer(n)) throw ConfigError("freeze_layers: unknown layer " + n);
        for (auto& l : model.layers()) l->set_frozen(false);
        for (const auto& n : names) model.find_layer(n)->set_frozen(true);
        return;
    }
}

} // namespace dnet

#endif
