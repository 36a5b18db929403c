// dnet: synthetic diagram datasets, CNN training, transfer experiments, CAM.
#include <cstdio>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "dnet/cam.hpp"
#include "dnet/gradcheck.hpp"
#include "dnet/sweep.hpp"
#include "dnet/synthgen.hpp"
#include "dnet/weights.hpp"

namespace fs = std::filesystem;
using namespace dnet;

namespace {

LabeledDataset load_any_dataset(const std::string& dir) {
    if (fs::exists(fs::path(dir) / "manifest.csv")) return load_manifest_dataset(dir);
    return ingest_directory(dir).dataset;
}

ArchSpec make_arch_spec(const std::string& arch, int canvas, double width_mult, int outputs,
                        uint64_t seed) {
    if (!is_known_arch(arch)) throw ConfigError("unknown arch '" + arch + "'");
    ArchSpec spec;
    spec.arch_id = arch;
    spec.height = spec.width = canvas;
    spec.width_mult = width_mult;
    spec.outputs = outputs;
    spec.seed = seed;
    return spec;
}

void print_report_tail(const TrainReport& r) {
    std::printf("epochs_ran=%d best_epoch=%d stopped_early=%d\n", r.epochs_ran, r.best_epoch,
                r.stopped_early ? 1 : 0);
    for (size_t i = 0; i < r.epochs.size(); ++i)
        std::printf("  epoch %2zu  train_loss=%.4f train_acc=%.4f val_acc=%.4f\n", i + 1,
                    r.epochs[i].train_loss, r.epochs[i].train_acc, r.epochs[i].val_acc);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"dnet: CNN transfer-learning experiments on synthetic diagram data"};
    app.require_subcommand(1);
    app.set_config("--config", "", "read options from a config file");

    // ---- gen
    auto* gen = app.add_subcommand("gen", "generate a synthetic dataset");
    std::string gen_kind = "uml", gen_out;
    int64_t gen_count = 100;
    int gen_canvas = 64;
    uint64_t gen_seed = 42;
    gen->add_option("--kind", gen_kind, "uml | shapes")->capture_default_str();
    gen->add_option("--count", gen_count, "total images")->capture_default_str();
    gen->add_option("--seed", gen_seed, "global seed")->capture_default_str();
    gen->add_option("--canvas", gen_canvas, "output image size")->capture_default_str();
    gen->add_option("--out", gen_out, "output directory")->required();

    // ---- pretrain
    auto* pre = app.add_subcommand("pretrain", "train a backbone on the source task");
    std::string pre_data, pre_out, pre_arch = "mini";
    int pre_canvas = 64, pre_epochs = 20, pre_batch = 32;
    double pre_width = 0.0, pre_val_fraction = 0.1, pre_lr = 1e-3;
    uint64_t pre_seed = 42;
    pre->add_option("--data", pre_data, "source dataset directory")->required();
    pre->add_option("--out", pre_out, "output weight file")->required();
    pre->add_option("--arch", pre_arch, "trainable arch id")->capture_default_str();
    pre->add_option("--canvas", pre_canvas, "input size")->capture_default_str();
    pre->add_option("--width-mult", pre_width, "channel width multiplier");
    pre->add_option("--epochs", pre_epochs, "max epochs")->capture_default_str();
    pre->add_option("--batch", pre_batch, "batch size")->capture_default_str();
    pre->add_option("--lr", pre_lr, "adam learning rate")->capture_default_str();
    pre->add_option("--val-fraction", pre_val_fraction, "validation fraction")
        ->capture_default_str();
    pre->add_option("--seed", pre_seed, "seed")->capture_default_str();

    // ---- train
    auto* tr = app.add_subcommand("train", "train one model on a labeled dataset");
    std::string tr_data, tr_arch = "small-cnn", tr_weights, tr_save, tr_freeze = "auto";
    int tr_canvas = 64, tr_n = 0, tr_batch = 32, tr_epochs = 100, tr_test = 0;
    double tr_width = 0.0, tr_val_fraction = 0.2, tr_lr = 1e-3;
    uint64_t tr_seed = 42;
    tr->add_option("--data", tr_data, "dataset directory")->required();
    tr->add_option("--arch", tr_arch, "arch id")->capture_default_str();
    tr->add_option("--weights", tr_weights, "backbone weights to import (by name)");
    tr->add_option("--save", tr_save, "save full model weights here");
    tr->add_option("--freeze", tr_freeze, "auto | none | all-but-last-dense")
        ->capture_default_str();
    tr->add_option("--canvas", tr_canvas, "input size")->capture_default_str();
    tr->add_option("--n", tr_n, "training samples per class (0 = all available)")
        ->capture_default_str();
    tr->add_option("--test", tr_test, "held-out test samples per class")->capture_default_str();
    tr->add_option("--batch", tr_batch, "batch size")->capture_default_str();
    tr->add_option("--epochs", tr_epochs, "max epochs")->capture_default_str();
    int tr_patience = 5, tr_min_epochs = 5;
    tr->add_option("--patience", tr_patience, "early-stop patience")->capture_default_str();
    tr->add_option("--min-epochs", tr_min_epochs, "minimum epochs")->capture_default_str();
    tr->add_option("--lr", tr_lr, "adam learning rate")->capture_default_str();
    tr->add_option("--val-fraction", tr_val_fraction, "validation fraction of n")
        ->capture_default_str();
    tr->add_option("--width-mult", tr_width, "channel width multiplier");
    tr->add_option("--seed", tr_seed, "seed")->capture_default_str();

    // ---- sweep
    auto* sw = app.add_subcommand("sweep", "sample-size sweep over architectures");
    std::string sw_data, sw_weights, sw_out, sw_preset = "mini", sw_grid, sw_archs, sw_cache;
    int sw_trials = 0, sw_canvas = 0, sw_folds = 0, sw_test = 0, sw_batch = 0;
    double sw_width = -1.0, sw_val_fraction = -1.0;
    uint64_t sw_seed = 0;
    bool sw_kfold = false, sw_timings = false, sw_has_seed = false;
    sw->add_option("--data", sw_data, "dataset directory")->required();
    sw->add_option("--out", sw_out, "output CSV")->required();
    sw->add_option("--weights", sw_weights, "backbone weights for frozen archs");
    sw->add_option("--preset", sw_preset, "mini | paper-a | paper-b")->capture_default_str();
    sw->add_option("--grid", sw_grid, "override grid, start:end:step or preset name");
    sw->add_option("--archs", sw_archs, "override arch list, comma separated");
    sw->add_option("--trials", sw_trials, "override trial count");
    sw->add_option("--canvas", sw_canvas, "override input size");
    sw->add_option("--width-mult", sw_width, "override width multiplier");
    sw->add_option("--test-per-class", sw_test, "override test-set size per class");
    sw->add_option("--val-fraction", sw_val_fraction, "override validation fraction");
    sw->add_option("--batch", sw_batch, "override batch size");
    sw->add_flag("--kfold", sw_kfold, "k-fold evaluation instead of holdout");
    sw->add_option("--folds", sw_folds, "fold count for --kfold");
    sw->add_option("--seed", sw_seed, "master seed")->each([&](const std::string&) {
        sw_has_seed = true;
    });
    sw->add_option("--cache", sw_cache, "feature cache directory");
    sw->add_flag("--timings", sw_timings, "record real wall_seconds (breaks rerun identity)");

    // ---- cam
    auto* cam = app.add_subcommand("cam", "class activation map overlay for one image");
    std::string cam_weights, cam_image, cam_out;
    double cam_alpha = 0.4;
    int cam_class = -1;
    cam->add_option("--weights", cam_weights, "full model weight file")->required();
    cam->add_option("--image", cam_image, "input PGM/PPM image")->required();
    cam->add_option("--out", cam_out, "output PPM (side-by-side)")->required();
    cam->add_option("--alpha", cam_alpha, "overlay opacity in [0,1]")->capture_default_str();
    cam->add_option("--class", cam_class, "class index (-1 = predicted)")
        ->capture_default_str();

    // ---- plot
    auto* pl = app.add_subcommand("plot", "learning-curve SVG from a sweep CSV");
    std::string pl_in, pl_out;
    pl->add_option("--in", pl_in, "sweep CSV")->required();
    pl->add_option("--out", pl_out, "output SVG")->required();

    // ---- inspect
    auto* ins = app.add_subcommand("inspect", "print tensor table and parameter counts");
    std::string ins_weights, ins_arch;
    int ins_canvas = 64;
    double ins_width = 0.0;
    int ins_outputs = 1;
    ins->add_option("--weights", ins_weights, "weight file to inspect");
    ins->add_option("--arch", ins_arch, "arch id to inspect");
    ins->add_option("--canvas", ins_canvas, "input size for --arch")->capture_default_str();
    ins->add_option("--width-mult", ins_width, "width multiplier for --arch");
    ins->add_option("--outputs", ins_outputs, "output count for --arch")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*gen) {
            DatasetKind kind;
            if (gen_kind == "uml") kind = DatasetKind::uml;
            else if (gen_kind == "shapes") kind = DatasetKind::shapes;
            else throw ConfigError("gen: --kind must be uml or shapes");
            const DatasetManifest m = gen_dataset(kind, gen_count, gen_seed, gen_out, gen_canvas);
            std::printf("wrote %lld images (%s, canvas %d) + manifest.csv to %s\n",
                        (long long)m.count, m.kind.c_str(), m.canvas, gen_out.c_str());
        } else if (*pre) {
            const LabeledDataset source = load_any_dataset(pre_data);
            ArchSpec spec = make_arch_spec(pre_arch, pre_canvas, pre_width,
                                           int(source.label_names.size()), pre_seed);
            TrainConfig cfg;
            cfg.max_epochs = pre_epochs;
            cfg.batch_size = pre_batch;
            cfg.adam.lr = pre_lr;
            cfg.seed = pre_seed;
            const PretrainResult res =
                pretrain_backbone(source, spec, cfg, pre_val_fraction, pre_out);
            print_report_tail(res.report);
            std::printf("best_val_accuracy=%.4f\n", res.best_val_accuracy);
            std::printf("saved backbone weights to %s\n", pre_out.c_str());
        } else if (*tr) {
            const LabeledDataset data = load_any_dataset(tr_data);
            const int outputs = data.num_classes() == 2 ? 1 : data.num_classes();
            ArchSpec spec = make_arch_spec(tr_arch, tr_canvas, tr_width, outputs, tr_seed);
            Model model = build_model<float>(spec);
            if (!tr_weights.empty()) {
                const LoadReport rep = load_weights(model, tr_weights, LoadMode::by_name);
                std::printf("loaded %zu tensors by name (%zu left at init)\n",
                            rep.loaded.size(), rep.missing_in_file.size());
            }
            if (tr_freeze == "none") freeze_layers(model, FreezePolicy::none);
            else if (tr_freeze == "all-but-last-dense")
                freeze_layers(model, FreezePolicy::all_but_last_dense);
            else if (tr_freeze != "auto")
                throw ConfigError("train: bad --freeze value " + tr_freeze);

            const std::vector<int> labels = data.labels();
            std::map<int, int64_t> counts;
            for (int l : labels) ++counts[l];
            int64_t min_class = int64_t(data.items.size());
            for (auto& [cls, cnt] : counts) min_class = std::min(min_class, cnt);
            int n = tr_n;
            if (n <= 0) {
                const int val_n = std::max(
                    1, int(std::llround(tr_val_fraction * double(min_class))));
                n = int(min_class) - val_n - tr_test;
            }
            SplitIndices split =
                stratified_split(labels, n, tr_val_fraction, tr_test, child_seed(tr_seed, 7));
            const int channels = int(model.input_shape()[0]);
            ImageView train_v(data, split.train, channels);
            ImageView val_v(data, split.val, channels);
            TrainConfig cfg;
            cfg.batch_size = tr_batch;
            cfg.max_epochs = tr_epochs;
            cfg.patience = tr_patience;
            cfg.min_epochs = tr_min_epochs;
            cfg.adam.lr = tr_lr;
            cfg.seed = tr_seed;
            const TrainReport report = train_model(model, train_v, val_v, cfg);
            print_report_tail(report);
            if (tr_test > 0) {
                ImageView test_v(data, split.test, channels);
                const EvalResult ev = evaluate(model, test_v);
                std::printf("test_accuracy=%.4f test_loss=%.4f (n=%zu)\n", ev.accuracy,
                            ev.mean_loss, split.test.size());
            }
            if (!tr_save.empty()) {
                save_weights(model, tr_save);
                std::printf("saved model weights to %s\n", tr_save.c_str());
            }
        } else if (*sw) {
            ExperimentPreset preset = make_preset(sw_preset);
            if (!sw_grid.empty()) preset.grid = expand_grid(sw_grid);
            if (!sw_archs.empty()) {
                preset.archs.clear();
                std::string cur;
                for (char c : sw_archs + ",") {
                    if (c == ',') {
                        if (!cur.empty()) preset.archs.push_back(cur);
                        cur.clear();
                    } else {
                        cur += c;
                    }
                }
                for (const auto& a : preset.archs)
                    if (!is_known_arch(a)) throw ConfigError("unknown arch '" + a + "'");
            }
            if (sw_trials > 0) preset.trials = sw_trials;
            if (sw_canvas > 0) preset.canvas = sw_canvas;
            if (sw_width >= 0.0) preset.width_mult = sw_width;
            if (sw_test > 0) preset.test_per_class = sw_test;
            if (sw_val_fraction >= 0.0) preset.val_fraction = sw_val_fraction;
            if (sw_batch > 0) preset.train.batch_size = sw_batch;
            if (sw_kfold) preset.eval_mode = EvalMode::kfold;
            if (sw_folds > 0) preset.folds = sw_folds;
            if (sw_has_seed) preset.seed = sw_seed;
            preset.timings = sw_timings;

            const LabeledDataset data = load_any_dataset(sw_data);
            FeatureCache cache;
            if (!sw_cache.empty()) cache = FeatureCache::open(sw_cache);
            const SweepResult result =
                run_sweep(preset, data, sw_weights, sw_cache.empty() ? nullptr : &cache);
            if (!sw_cache.empty()) cache.save(sw_cache);
            write_sweep_csv(result, sw_out);
            std::printf("wrote %zu rows to %s (test_per_class=%d)\n", result.rows.size(),
                        sw_out.c_str(), result.test_per_class_used);
        } else if (*cam) {
            const WeightFileInfo info = inspect_weights(cam_weights);
            if (!is_known_arch(info.arch_id))
                throw DataError("cam: weight file has unknown arch '" + info.arch_id + "'");
            // outputs and width from the head tensor
            ArchSpec spec;
            spec.arch_id = info.arch_id;
            if (info.input_shape.rank == 3) {
                spec.in_channels = info.input_shape[0];
                spec.height = info.input_shape[1];
                spec.width = info.input_shape[2];
            }
            for (const auto& e : info.entries)
                if (e.name == "head_fc.W") {
                    spec.outputs = int(e.shape[1]);
                    spec.width_mult = double(e.shape[0]) / 512.0;
                }
            Model model = build_model<float>(spec);
            load_weights(model, cam_weights, LoadMode::strict);

            Image img = read_pnm(cam_image);
            if (img.width != int(spec.width) || img.height != int(spec.height))
                img = bilinear_resize(img, int(spec.width), int(spec.height));
            Tensor x = to_input_tensor(img, int(spec.in_channels));
            Tensor logits = model.forward(x, Mode::eval, nullptr);
            int cls = cam_class;
            bool negate = false;
            if (model.outputs() == 1) {
                const int predicted = logits[0] >= 0.0f ? 1 : 0;
                // one logit: its weights score class 1; the map for class 0
                // is the negation
                if (cls < 0) cls = predicted;
                negate = (cls == 0);
                std::printf("predicted class %d (logit %.4f)\n", predicted, double(logits[0]));
                cls = 0;
            } else if (cls < 0) {
                cls = 0;
                for (int64_t j = 1; j < logits.shape()[1]; ++j)
                    if (logits[j] > logits[cls]) cls = int(j);
                std::printf("predicted class %d\n", cls);
            }
            Tensor raw = compute_cam(model, x, cls);
            if (negate)
                for (int64_t i = 0; i < raw.numel(); ++i) raw[i] = -raw[i];
            const Image panel = render_heatmap_overlay(raw, img, cam_alpha);
            write_pnm(panel, cam_out);
            std::printf("wrote %s (%dx%d)\n", cam_out.c_str(), panel.width, panel.height);
        } else if (*pl) {
            plot_csv(pl_in, pl_out);
            std::printf("wrote %s\n", pl_out.c_str());
        } else if (*ins) {
            if (!ins_weights.empty()) {
                const WeightFileInfo info = inspect_weights(ins_weights);
                std::printf("arch: %s\ninput: %s\n", info.arch_id.c_str(),
                            info.input_shape.str().c_str());
                int64_t total = 0;
                for (const auto& e : info.entries) {
                    std::printf("  %-24s f32 %-14s offset %llu\n", e.name.c_str(),
                                e.shape.str().c_str(), (unsigned long long)e.offset);
                    total += e.shape.numel();
                }
                std::printf("tensors: %zu  values: %lld  payload: %llu bytes\n",
                            info.entries.size(), (long long)total,
                            (unsigned long long)info.payload_bytes);
            } else if (!ins_arch.empty()) {
                ArchSpec spec = make_arch_spec(ins_arch, ins_canvas, ins_width, ins_outputs, 0);
                Model model = build_model<float>(spec);
                for (auto* p : model.params())
                    std::printf("  %-24s %-14s %lld\n", p->name.c_str(),
                                p->value.shape().str().c_str(), (long long)p->value.numel());
                const ParamCounts c = count_params(model);
                std::printf("total=%lld trainable=%lld\n", (long long)c.total,
                            (long long)c.trainable);
            } else {
                throw ConfigError("inspect: give --weights or --arch");
            }
        }
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const NumericError& e) {
        std::fprintf(stderr, "numeric error: %s\n", e.what());
        return 3;
    } catch (const Error& e) { // DataError, ShapeError, io
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
