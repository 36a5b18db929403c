#include "dnet/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <map>
#include <memory>

namespace dnet {

ImageView::ImageView(const LabeledDataset& ds, std::vector<size_t> indices, int channels)
    : ds_(&ds), indices_(std::move(indices)), channels_(channels) {
    for (size_t i : indices_)
        if (i >= ds.items.size()) throw ConfigError("ImageView: index out of range");
}

Shape ImageView::example_shape() const {
    if (indices_.empty()) return Shape{1, 1, 1};
    const Image& img = ds_->items[indices_[0]].image;
    return Shape{channels_, img.height, img.width};
}

void ImageView::fill(size_t i, float* dst) const {
    fill_input_floats(ds_->items[indices_[i]].image, channels_, dst);
}

FeatureView::FeatureView(Tensor features, std::vector<int> labels)
    : features_(std::move(features)), labels_(std::move(labels)) {
    if (features_.shape().rank != 2 ||
        features_.shape()[0] != int64_t(labels_.size()))
        throw ConfigError("FeatureView: features must be NxF with one label per row");
}

void FeatureView::fill(size_t i, float* dst) const {
    const int64_t f = features_.shape()[1];
    std::memcpy(dst, features_.data() + int64_t(i) * f, size_t(f) * sizeof(float));
}

void assemble_batch(const TrainSet& set, const std::vector<size_t>& order, size_t begin,
                    size_t end, Tensor& x, std::vector<int>& labels) {
    const Shape ex = set.example_shape();
    const int64_t n = int64_t(end - begin);
    Shape batch_shape;
    if (ex.rank == 3)
        batch_shape = Shape{n, ex[0], ex[1], ex[2]};
    else if (ex.rank == 1)
        batch_shape = Shape{n, ex[0]};
    else
        throw ConfigError("unsupported example rank");
    if (x.shape() != batch_shape) x = Tensor(batch_shape);
    labels.resize(size_t(n));
    const int64_t stride = ex.numel();
    for (size_t i = begin; i < end; ++i) {
        set.fill(order[i], x.data() + int64_t(i - begin) * stride);
        labels[i - begin] = set.label(order[i]);
    }
}

int best_epoch_index(const std::vector<double>& history) {
    int best = 0;
    for (int i = 1; i < int(history.size()); ++i)
        if (history[size_t(i)] > history[size_t(best)]) best = i;
    return best;
}

bool early_stop_should_stop(const std::vector<double>& history, int min_epochs, int patience) {
    const int e = int(history.size());
    if (e < min_epochs) return false;
    const int best = best_epoch_index(history) + 1;
    return e - best >= patience;
}

namespace {

int predict_count_correct(const Tensor& logits, const std::vector<int>& labels) {
    const int64_t n = logits.shape()[0], k = logits.shape()[1];
    int correct = 0;
    for (int64_t i = 0; i < n; ++i) {
        int pred;
        if (k == 1) {
            pred = logits[i] >= 0.0f ? 1 : 0; // sigmoid(z) >= 0.5, ties to class 1
        } else {
            pred = 0;
            const float* row = logits.data() + i * k;
            for (int64_t j = 1; j < k; ++j)
                if (row[j] > row[pred]) pred = int(j);
        }
        if (pred == labels[size_t(i)]) ++correct;
    }
    return correct;
}

void fisher_yates(std::vector<size_t>& v, SeededRng& rng) {
    for (size_t i = v.size(); i > 1; --i)
        std::swap(v[i - 1], v[size_t(rng.next_below(uint64_t(i)))]);
}

} // namespace

EvalResult evaluate(Model& model, const TrainSet& ds, int batch_size) {
    const size_t n = ds.size();
    if (n == 0) throw DataError("evaluate: empty dataset");
    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;

    Tensor x;
    std::vector<int> labels;
    int correct = 0;
    double loss_sum = 0.0;
    for (size_t b = 0; b < n; b += size_t(batch_size)) {
        const size_t e = std::min(n, b + size_t(batch_size));
        assemble_batch(ds, order, b, e, x, labels);
        Tensor logits = model.forward(x, Mode::eval, nullptr);
        const auto res = (model.outputs() == 1) ? sigmoid_bce(logits, labels)
                                                : softmax_ce(logits, labels);
        if (!std::isfinite(res.loss)) throw NumericError("evaluate: non-finite loss");
        loss_sum += res.loss * double(e - b);
        correct += predict_count_correct(logits, labels);
    }
    return EvalResult{double(correct) / double(n), loss_sum / double(n)};
}

TrainReport train_model(Model& model, const TrainSet& train, const TrainSet& val,
                        const TrainConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    const size_t n = train.size();
    if (n == 0) throw DataError("train_model: empty training set");
    if (cfg.min_epochs < 1 || cfg.patience < 1 || cfg.batch_size < 1)
        throw ConfigError("train_model: min_epochs, patience, batch_size must be >= 1");

    const int batch = int(std::min<size_t>(size_t(cfg.batch_size), n));
    SeededRng rng(cfg.seed);

    auto trainable = model.trainable_params();
    std::unique_ptr<AdamT<float>> adam;
    std::unique_ptr<SgdT<float>> sgd;
    if (cfg.opt == TrainConfig::Opt::adam)
        adam = std::make_unique<AdamT<float>>(trainable, cfg.adam);
    else
        sgd = std::make_unique<SgdT<float>>(trainable, cfg.sgd);

    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;

    TrainReport report;
    std::vector<double> history;
    std::vector<Tensor> best_values;
    Tensor x;
    std::vector<int> labels;

    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        fisher_yates(order, rng);
        double loss_sum = 0.0;
        int correct = 0;
        for (size_t b = 0; b < n; b += size_t(batch)) {
            const size_t e = std::min(n, b + size_t(batch));
            assemble_batch(train, order, b, e, x, labels);
            Tensor logits = model.forward(x, Mode::train, &rng);
            const auto res = (model.outputs() == 1) ? sigmoid_bce(logits, labels)
                                                    : softmax_ce(logits, labels);
            if (!std::isfinite(res.loss))
                throw NumericError("train_model: non-finite loss at epoch " +
                                   std::to_string(epoch));
            loss_sum += res.loss * double(e - b);
            correct += predict_count_correct(logits, labels);
            model.backward(res.dlogits);
            if (adam)
                adam->step();
            else
                sgd->step();
        }

        EpochStats stats;
        stats.train_loss = loss_sum / double(n);
        stats.train_acc = double(correct) / double(n);
        stats.val_acc = val.size() ? evaluate(model, val).accuracy : stats.train_acc;
        report.epochs.push_back(stats);
        history.push_back(stats.val_acc);

        if (cfg.restore_best && best_epoch_index(history) == int(history.size()) - 1) {
            best_values.clear();
            for (auto* p : trainable) best_values.push_back(p->value);
        }
        if (early_stop_should_stop(history, cfg.min_epochs, cfg.patience)) {
            report.stopped_early = true;
            break;
        }
    }

    report.epochs_ran = int(history.size());
    report.best_epoch = best_epoch_index(history) + 1;
    if (cfg.restore_best && !best_values.empty()) {
        for (size_t i = 0; i < trainable.size(); ++i) trainable[i]->value = best_values[i];
    }
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

SplitIndices stratified_split(const std::vector<int>& labels, int train_per_class,
                              double val_fraction, int test_per_class, uint64_t seed) {
    if (train_per_class < 0 || test_per_class < 0)
        throw ConfigError("stratified_split: negative sizes");
    std::map<int, std::vector<size_t>> by_class;
    for (size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
    if (by_class.empty()) throw DataError("stratified_split: empty manifest");

    const int val_per_class =
        (val_fraction <= 0.0 || train_per_class == 0)
            ? 0
            : std::max(1, int(std::llround(val_fraction * double(train_per_class))));

    SplitIndices out;
    for (auto& [cls, idx] : by_class) {
        SeededRng rng(child_seed(seed, uint64_t(cls)));
        fisher_yates(idx, rng);
        const size_t need = size_t(train_per_class) + size_t(val_per_class) +
                            size_t(test_per_class);
        if (need > idx.size())
            throw DataError("stratified_split: class " + std::to_string(cls) + " has " +
                            std::to_string(idx.size()) + " samples, need " +
                            std::to_string(need));
        for (int i = 0; i < train_per_class; ++i) out.train.push_back(idx[size_t(i)]);
        for (int i = 0; i < val_per_class; ++i)
            out.val.push_back(idx[size_t(train_per_class) + size_t(i)]);
        for (int i = 0; i < test_per_class; ++i)
            out.test.push_back(idx[idx.size() - size_t(test_per_class) + size_t(i)]);
    }
    return out;
}

std::vector<int> kfold_assign(const std::vector<int>& labels, int k, uint64_t seed) {
    if (k < 2) throw ConfigError("kfold_assign: k must be >= 2");
    std::map<int, std::vector<size_t>> by_class;
    for (size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
    std::vector<int> fold(labels.size(), -1);
    for (auto& [cls, idx] : by_class) {
        SeededRng rng(child_seed(seed, uint64_t(cls)));
        fisher_yates(idx, rng);
        for (size_t i = 0; i < idx.size(); ++i) fold[idx[i]] = int(i % size_t(k));
    }
    return fold;
}

} // namespace dnet
