#ifndef DNET_SWEEP_HPP
#define DNET_SWEEP_HPP

#include <string>
#include <vector>

#include "dnet/features.hpp"
#include "dnet/models.hpp"
#include "dnet/train.hpp"

namespace dnet {

// "start:end:step" (inclusive arithmetic sequence) or a preset name:
// paper-a = 50:1800:250, paper-b = 5:50:5, mini = 5,10,25,50,100.
std::vector<int> expand_grid(const std::string& spec);

enum class EvalMode { holdout, kfold };

struct ExperimentPreset {
    std::string name = "custom";
    std::vector<int> grid;
    int trials = 5;
    std::vector<std::string> archs;
    EvalMode eval_mode = EvalMode::holdout;
    int folds = 5;
    int canvas = 64;
    double width_mult = 0.0; // <=0: per-arch default
    int test_per_class = 500; // clamped to what the data can spare
    double val_fraction = 0.2;
    uint64_t seed = 42;
    TrainConfig train;
    bool timings = false; // real wall_seconds make reruns non-identical
};

// mini: canvas 64, width-mult 1/8, grid [5,10,25,50,100], archs
// mini-frozen / small-cnn / mini. paper-a and paper-b: canvas 250, vgg16
// variants, the two published grids.
ExperimentPreset make_preset(const std::string& name);

struct SweepRow {
    std::string arch;
    int samples_per_class = 0;
    int trial = 0;
    uint64_t seed = 0;
    int fold = -1; // -1 in holdout mode
    int epochs_ran = 0;
    bool stopped_early = false;
    double test_accuracy = 0.0;
    double test_loss = 0.0;
    double wall_seconds = 0.0;
};

struct SweepResult {
    ExperimentPreset preset;
    int test_per_class_used = 0;
    std::vector<SweepRow> rows;
};

// Runs the full (arch x grid x trial [x fold]) matrix. Each arch is built
// once and snapshotted (frozen variants first import backbone weights);
// every cell restores the snapshot before training. The held-out test block
// is fixed per trial seed and shared by all archs. Frozen archs train their
// head on cached GAP features.
SweepResult run_sweep(const ExperimentPreset& preset, const LabeledDataset& data,
                      const std::string& backbone_weights_path, FeatureCache* cache);

void write_sweep_csv(const SweepResult& result, const std::string& path);

struct SweepCsv {
    std::vector<std::string> archs;
    std::vector<int> grid;
    int trials = 0;
    int64_t expected_rows = 0;
    std::vector<SweepRow> rows;
};
SweepCsv read_sweep_csv(const std::string& path);

// One mean line per arch with a min-max band over trials; x = samples per
// class, y = test accuracy in [0,1]. Deterministic bytes for identical
// input.
void plot_csv(const std::string& in_csv, const std::string& out_svg);

struct PretrainResult {
    TrainReport report;
    double best_val_accuracy = 0.0;
    std::string weights_path;
};

// Trains arch + K-class head on the source dataset, then strips the head
// and saves backbone-only weights.
PretrainResult pretrain_backbone(const LabeledDataset& source, const ArchSpec& arch,
                                 const TrainConfig& train_cfg, double val_fraction,
                                 const std::string& out_weights);

} // namespace dnet

#endif
