#ifndef DNET_TRAIN_HPP
#define DNET_TRAIN_HPP

#include <vector>

#include "dnet/data.hpp"
#include "dnet/model.hpp"
#include "dnet/optim.hpp"

namespace dnet {

// A batch source: yields per-example float rows plus labels. Lets the same
// training loop run on image datasets and on cached feature matrices.
class TrainSet {
public:
    virtual ~TrainSet() = default;
    virtual size_t size() const = 0;
    virtual Shape example_shape() const = 0; // (C,H,W) or (F)
    virtual int label(size_t i) const = 0;
    virtual void fill(size_t i, float* dst) const = 0;
};

// View over a subset of a LabeledDataset, converting to the model's input
// channel count on the fly.
class ImageView final : public TrainSet {
public:
    ImageView(const LabeledDataset& ds, std::vector<size_t> indices, int channels);
    size_t size() const override { return indices_.size(); }
    Shape example_shape() const override;
    int label(size_t i) const override { return ds_->items[indices_[i]].label; }
    void fill(size_t i, float* dst) const override;
    const std::vector<size_t>& indices() const { return indices_; }

private:
    const LabeledDataset* ds_;
    std::vector<size_t> indices_;
    int channels_;
};

// Owns a feature matrix [N x F] and its labels.
class FeatureView final : public TrainSet {
public:
    FeatureView(Tensor features, std::vector<int> labels);
    size_t size() const override { return labels_.size(); }
    Shape example_shape() const override { return Shape{features_.shape()[1]}; }
    int label(size_t i) const override { return labels_[i]; }
    void fill(size_t i, float* dst) const override;

private:
    Tensor features_;
    std::vector<int> labels_;
};

// Assembles examples[indices[i0..i1)] into a batch tensor (N x example dims)
// and the matching label vector.
void assemble_batch(const TrainSet& set, const std::vector<size_t>& order, size_t begin,
                    size_t end, Tensor& x, std::vector<int>& labels);

struct TrainConfig {
    enum class Opt { adam, sgd };
    Opt opt = Opt::adam;
    AdamConfig adam;
    SgdConfig sgd;
    int batch_size = 32; // clamped to the dataset size
    int min_epochs = 5;
    int patience = 5;
    int max_epochs = 100;
    bool restore_best = true;
    uint64_t seed = 0;
};

struct EpochStats {
    double train_loss = 0.0;
    double train_acc = 0.0;
    double val_acc = 0.0;
};

struct TrainReport {
    std::vector<EpochStats> epochs;
    int epochs_ran = 0;
    int best_epoch = 0; // 1-based, first occurrence of the max val accuracy
    bool stopped_early = false;
    double wall_seconds = 0.0;
};

// First index of the maximum (strict improvement moves the best).
int best_epoch_index(const std::vector<double>& history);

// Stop after epoch e (= history length) iff e >= min_epochs and
// e - best_epoch >= patience.
bool early_stop_should_stop(const std::vector<double>& history, int min_epochs, int patience);

// Seeded mini-batch training with early stopping on validation accuracy.
// Deterministic: identical config and inputs give bitwise-identical
// parameters and report.
TrainReport train_model(Model& model, const TrainSet& train, const TrainSet& val,
                        const TrainConfig& cfg);

struct EvalResult {
    double accuracy = 0.0;
    double mean_loss = 0.0;
};

// Eval-mode accuracy and mean loss. Binary models threshold at logit >= 0
// (sigmoid 0.5 counts as class 1); multi-class takes the argmax (first on
// ties).
EvalResult evaluate(Model& model, const TrainSet& ds, int batch_size = 64);

struct SplitIndices {
    std::vector<size_t> train, val, test;
};

// Per class: shuffle once under child_seed(seed, class); train takes the
// first train_per_class, validation the next max(1, round(val_fraction *
// train_per_class)) (0 when val_fraction <= 0), test the LAST
// test_per_class. The test block therefore depends only on the seed, not on
// the train size: growing train keeps the test set fixed and the train sets
// nested.
SplitIndices stratified_split(const std::vector<int>& labels, int train_per_class,
                              double val_fraction, int test_per_class, uint64_t seed);

// Stratified fold assignment: per class, shuffled then dealt round-robin.
std::vector<int> kfold_assign(const std::vector<int>& labels, int k, uint64_t seed);

} // namespace dnet

#endif
