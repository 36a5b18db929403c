#include "dnet/sweep.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "dnet/weights.hpp"

namespace dnet {

std::vector<int> expand_grid(const std::string& spec) {
    if (spec == "paper-a") return expand_grid("50:1800:250");
    if (spec == "paper-b") return expand_grid("5:50:5");
    if (spec == "mini") return {5, 10, 25, 50, 100};

    const auto c1 = spec.find(':');
    const auto c2 = spec.find(':', c1 == std::string::npos ? c1 : c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
        throw ConfigError("grid spec must be start:end:step or a preset name, got '" + spec +
                          "'");
    int start = 0, end = 0, step = 0;
    try {
        start = std::stoi(spec.substr(0, c1));
        end = std::stoi(spec.substr(c1 + 1, c2 - c1 - 1));
        step = std::stoi(spec.substr(c2 + 1));
    } catch (...) {
        throw ConfigError("grid spec has non-numeric fields: '" + spec + "'");
    }
    if (step <= 0) throw ConfigError("grid step must be positive");
    if (end < start) throw ConfigError("grid end must be >= start");
    std::vector<int> out;
    for (int v = start; v <= end; v += step) out.push_back(v);
    return out;
}

ExperimentPreset make_preset(const std::string& name) {
    ExperimentPreset p;
    p.name = name;
    if (name == "mini") {
        p.grid = expand_grid("mini");
        p.archs = {"mini-frozen", "small-cnn", "mini"};
        p.canvas = 64;
        p.width_mult = 0.125;
    } else if (name == "paper-a" || name == "paper-b") {
        p.grid = expand_grid(name);
        p.archs = {"vgg16-frozen", "small-cnn", "vgg16"};
        p.canvas = 250;
        p.width_mult = 1.0;
    } else {
        throw ConfigError("unknown preset '" + name + "' (mini, paper-a, paper-b)");
    }
    return p;
}

namespace {

struct CellOutcome {
    TrainReport report;
    EvalResult test;
};

Tensor gather_rows(const Tensor& all, const std::vector<size_t>& rows) {
    const int64_t f = all.shape()[1];
    Tensor out(Shape{int64_t(rows.size()), f});
    for (size_t i = 0; i < rows.size(); ++i)
        std::copy_n(all.data() + int64_t(rows[i]) * f, f, out.data() + int64_t(i) * f);
    return out;
}

std::vector<int> gather_labels(const std::vector<int>& labels, const std::vector<size_t>& rows) {
    std::vector<int> out;
    out.reserve(rows.size());
    for (size_t i : rows) out.push_back(labels[i]);
    return out;
}

} // namespace

SweepResult run_sweep(const ExperimentPreset& preset, const LabeledDataset& data,
                      const std::string& backbone_weights_path, FeatureCache* cache) {
    if (preset.grid.empty()) throw ConfigError("sweep: empty grid");
    if (preset.trials < 1) throw ConfigError("sweep: trials must be >= 1");
    for (size_t i = 1; i < preset.grid.size(); ++i)
        if (preset.grid[i] <= preset.grid[i - 1])
            throw ConfigError("sweep: grid must be strictly increasing");
    if (data.num_classes() < 2) throw DataError("sweep: need at least two classes");

    const std::vector<int> labels = data.labels();
    int64_t min_class = int64_t(data.items.size());
    {
        std::map<int, int64_t> counts;
        for (int l : labels) ++counts[l];
        for (auto& [cls, cnt] : counts) min_class = std::min(min_class, cnt);
    }

    const int max_n = preset.grid.back();
    const int val_at_max =
        preset.val_fraction <= 0.0
            ? 0
            : std::max(1, int(std::llround(preset.val_fraction * double(max_n))));
    int test_n = 0;
    if (preset.eval_mode == EvalMode::holdout) {
        test_n = int(std::min<int64_t>(preset.test_per_class,
                                       min_class - int64_t(max_n) - int64_t(val_at_max)));
        if (test_n < 1)
            throw DataError("sweep: insufficient data for the largest grid cell plus a test "
                            "set (have " + std::to_string(min_class) + "/class, need > " +
                            std::to_string(max_n + val_at_max) + ")");
    } else {
        if (int64_t(max_n) > min_class)
            throw DataError("sweep: insufficient data for the largest grid cell");
        if (preset.folds < 2) throw ConfigError("sweep: kfold needs folds >= 2");
    }

    SweepResult result;
    result.preset = preset;
    result.test_per_class_used = test_n;

    for (size_t arch_index = 0; arch_index < preset.archs.size(); ++arch_index) {
        const std::string& arch = preset.archs[arch_index];
        ArchSpec spec;
        spec.arch_id = arch;
        spec.height = spec.width = preset.canvas;
        spec.width_mult = preset.width_mult;
        spec.outputs = 1;
        spec.seed = child_seed(preset.seed, 500 + arch_index);
        Model model = build_model<float>(spec);
        const int channels = int(model.input_shape()[0]);

        const bool frozen = is_frozen_arch(arch);
        if (frozen) {
            if (backbone_weights_path.empty())
                throw DataError("sweep: arch " + arch + " needs pre-trained backbone weights");
            load_weights(model, backbone_weights_path, LoadMode::by_name);
        }
        Snapshot snap = snapshot(model);

        // Frozen archs never change their backbone, so every image's GAP
        // features can be computed once up front (or served from the cache).
        Tensor all_features;
        int64_t gap_index = -1;
        if (frozen) {
            std::vector<size_t> everything(data.items.size());
            for (size_t i = 0; i < everything.size(); ++i) everything[i] = i;
            if (cache) cache->ensure_fingerprint(backbone_fingerprint(model),
                                                 cache->dim());
            all_features = extract_features(model, data, everything, cache);
            gap_index = model.find_kind("global_avg_pool");
        }

        for (size_t grid_index = 0; grid_index < preset.grid.size(); ++grid_index) {
            const int n = preset.grid[size_t(grid_index)];
            for (int trial = 0; trial < preset.trials; ++trial) {
                const uint64_t trial_seed = child_seed(preset.seed, 1000 + uint64_t(trial));
                const uint64_t cell_seed =
                    child_seed(child_seed(trial_seed, 2000 + arch_index), grid_index);

                TrainConfig cfg = preset.train;
                cfg.seed = cell_seed;

                auto run_cell = [&](const std::vector<size_t>& tr, const std::vector<size_t>& va,
                                    const std::vector<size_t>& te) -> CellOutcome {
                    restore(model, snap);
                    CellOutcome out;
                    if (frozen) {
                        Model head = model.slice(size_t(gap_index) + 1, model.num_layers());
                        FeatureView train_v(gather_rows(all_features, tr), gather_labels(labels, tr));
                        FeatureView val_v(gather_rows(all_features, va), gather_labels(labels, va));
                        FeatureView test_v(gather_rows(all_features, te), gather_labels(labels, te));
                        out.report = train_model(head, train_v, val_v, cfg);
                        out.test = evaluate(head, test_v);
                    } else {
                        ImageView train_v(data, tr, channels);
                        ImageView val_v(data, va, channels);
                        ImageView test_v(data, te, channels);
                        out.report = train_model(model, train_v, val_v, cfg);
                        out.test = evaluate(model, test_v);
                    }
                    return out;
                };

                if (preset.eval_mode == EvalMode::holdout) {
                    SplitIndices split =
                        stratified_split(labels, n, preset.val_fraction, test_n, trial_seed);
                    CellOutcome out = run_cell(split.train, split.val, split.test);
                    SweepRow row{arch,
                                 n,
                                 trial,
                                 cell_seed,
                                 -1,
                                 out.report.epochs_ran,
                                 out.report.stopped_early,
                                 out.test.accuracy,
                                 out.test.mean_loss,
                                 preset.timings ? out.report.wall_seconds : 0.0};
                    result.rows.push_back(row);
                } else {
                    SplitIndices split = stratified_split(labels, n, 0.0, 0, trial_seed);
                    std::vector<int> sub_labels = gather_labels(labels, split.train);
                    std::vector<int> fold_of =
                        kfold_assign(sub_labels, preset.folds, child_seed(trial_seed, 3000));
                    for (int fold = 0; fold < preset.folds; ++fold) {
                        std::vector<size_t> tr, te;
                        for (size_t i = 0; i < split.train.size(); ++i)
                            (fold_of[i] == fold ? te : tr).push_back(split.train[i]);
                        if (tr.empty() || te.empty())
                            throw DataError("sweep: fold " + std::to_string(fold) +
                                            " is empty at n=" + std::to_string(n));
                        TrainConfig fold_cfg = cfg;
                        fold_cfg.seed = child_seed(cell_seed, 4000 + uint64_t(fold));
                        CellOutcome out = run_cell(tr, te, te);
                        SweepRow row{arch,
                                     n,
                                     trial,
                                     fold_cfg.seed,
                                     fold,
                                     out.report.epochs_ran,
                                     out.report.stopped_early,
                                     out.test.accuracy,
                                     out.test.mean_loss,
                                     preset.timings ? out.report.wall_seconds : 0.0};
                        result.rows.push_back(row);
                    }
                }
            }
        }
    }
    return result;
}

namespace {

std::string join_ints(const std::vector<int>& v) {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(v[i]);
    }
    return s;
}

std::string join_strs(const std::vector<std::string>& v) {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        s += v[i];
    }
    return s;
}

std::vector<std::string> split_csv_field(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s + ",") {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!out.empty() && out.back().empty() && s.empty()) out.pop_back();
    return out;
}

} // namespace

void write_sweep_csv(const SweepResult& result, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    const auto& p = result.preset;
    char buf[64];
    out << "# preset=" << p.name << " archs=" << join_strs(p.archs)
        << " grid=" << join_ints(p.grid) << " trials=" << p.trials
        << " eval=" << (p.eval_mode == EvalMode::holdout ? "holdout" : "kfold")
        << " folds=" << (p.eval_mode == EvalMode::holdout ? 0 : p.folds)
        << " canvas=" << p.canvas << " width_mult=" << p.width_mult
        << " test_per_class=" << result.test_per_class_used
        << " val_fraction=" << p.val_fraction << " seed=" << p.seed
        << " rows=" << result.rows.size() << "\n";
    out << "arch,samples_per_class,trial,seed,fold,epochs_ran,stopped_early,test_accuracy,"
           "test_loss,wall_seconds\n";
    for (const auto& r : result.rows) {
        out << r.arch << "," << r.samples_per_class << "," << r.trial << "," << r.seed << ","
            << r.fold << "," << r.epochs_ran << "," << (r.stopped_early ? 1 : 0) << ",";
        std::snprintf(buf, sizeof buf, "%.6f,%.6f,%.3f", r.test_accuracy, r.test_loss,
                      r.wall_seconds);
        out << buf << "\n";
    }
    if (!out) throw DataError("short write to " + path);
}

SweepCsv read_sweep_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    SweepCsv csv;
    std::string line;
    bool saw_header = false, saw_columns = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream hs(line.substr(1));
            std::string kv;
            while (hs >> kv) {
                const auto eq = kv.find('=');
                if (eq == std::string::npos) continue;
                const std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
                try {
                    if (key == "archs") csv.archs = split_csv_field(val);
                    else if (key == "grid") {
                        for (const auto& g : split_csv_field(val)) csv.grid.push_back(std::stoi(g));
                    } else if (key == "trials") csv.trials = std::stoi(val);
                    else if (key == "rows") csv.expected_rows = std::stoll(val);
                } catch (...) {
                    throw DataError("sweep csv: bad header field " + kv);
                }
            }
            saw_header = true;
            continue;
        }
        if (!saw_columns) {
            saw_columns = true; // column names row
            continue;
        }
        const auto f = split_csv_field(line);
        if (f.size() != 10) throw DataError("sweep csv: malformed row '" + line + "'");
        SweepRow r;
        try {
            r.arch = f[0];
            r.samples_per_class = std::stoi(f[1]);
            r.trial = std::stoi(f[2]);
            r.seed = std::stoull(f[3]);
            r.fold = std::stoi(f[4]);
            r.epochs_ran = std::stoi(f[5]);
            r.stopped_early = std::stoi(f[6]) != 0;
            r.test_accuracy = std::stod(f[7]);
            r.test_loss = std::stod(f[8]);
            r.wall_seconds = std::stod(f[9]);
        } catch (...) {
            throw DataError("sweep csv: bad field in row '" + line + "'");
        }
        csv.rows.push_back(std::move(r));
    }
    if (!saw_header || !saw_columns) throw DataError("sweep csv: missing header");
    if (csv.expected_rows != int64_t(csv.rows.size()))
        throw DataError("sweep csv: header says " + std::to_string(csv.expected_rows) +
                        " rows, found " + std::to_string(csv.rows.size()));
    return csv;
}

void plot_csv(const std::string& in_csv, const std::string& out_svg) {
    const SweepCsv csv = read_sweep_csv(in_csv);
    if (csv.rows.empty()) throw DataError("plot: no rows in " + in_csv);

    // arch order from the header when present, else first appearance
    std::vector<std::string> archs = csv.archs;
    if (archs.empty())
        for (const auto& r : csv.rows)
            if (std::find(archs.begin(), archs.end(), r.arch) == archs.end())
                archs.push_back(r.arch);

    std::vector<int> xs = csv.grid;
    if (xs.empty()) {
        for (const auto& r : csv.rows)
            if (std::find(xs.begin(), xs.end(), r.samples_per_class) == xs.end())
                xs.push_back(r.samples_per_class);
        std::sort(xs.begin(), xs.end());
    }

    struct Series {
        std::vector<double> mean, lo, hi;
    };
    std::vector<Series> series(archs.size());
    for (size_t ai = 0; ai < archs.size(); ++ai) {
        for (int x : xs) {
            double sum = 0.0, lo = 1e30, hi = -1e30;
            int64_t cnt = 0;
            for (const auto& r : csv.rows) {
                if (r.arch != archs[ai] || r.samples_per_class != x) continue;
                sum += r.test_accuracy;
                lo = std::min(lo, r.test_accuracy);
                hi = std::max(hi, r.test_accuracy);
                ++cnt;
            }
            if (cnt == 0) throw DataError("plot: missing cell arch=" + archs[ai] + " n=" +
                                          std::to_string(x));
            series[ai].mean.push_back(sum / double(cnt));
            series[ai].lo.push_back(lo);
            series[ai].hi.push_back(hi);
        }
    }

    static const char* kPalette[6] = {"#1f77b4", "#d62728", "#2ca02c",
                                      "#9467bd", "#ff7f0e", "#8c564b"};
    const double W = 800, H = 520, L = 70, R = 640, T = 30, B = 460;
    const double xmin = xs.front(), xmax = xs.back();
    auto X = [&](double v) {
        if (xmax == xmin) return (L + R) / 2.0;
        return L + (v - xmin) / (xmax - xmin) * (R - L);
    };
    auto Y = [&](double v) { return B - v * (B - T); };
    char buf[128];
    auto fmt = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.2f", v);
        return std::string(buf);
    };

    std::ofstream out(out_svg, std::ios::binary);
    if (!out) throw DataError("cannot write " + out_svg);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << int(W) << "\" height=\""
        << int(H) << "\" viewBox=\"0 0 " << int(W) << " " << int(H) << "\">\n";
    out << "<rect width=\"" << int(W) << "\" height=\"" << int(H) << "\" fill=\"white\"/>\n";

    // axes
    out << "<line x1=\"" << fmt(L) << "\" y1=\"" << fmt(B) << "\" x2=\"" << fmt(R)
        << "\" y2=\"" << fmt(B) << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << fmt(L) << "\" y1=\"" << fmt(T) << "\" x2=\"" << fmt(L)
        << "\" y2=\"" << fmt(B) << "\" stroke=\"black\"/>\n";
    for (int x : xs) {
        out << "<line x1=\"" << fmt(X(x)) << "\" y1=\"" << fmt(B) << "\" x2=\"" << fmt(X(x))
            << "\" y2=\"" << fmt(B + 5) << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << fmt(X(x)) << "\" y=\"" << fmt(B + 20)
            << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">" << x
            << "</text>\n";
    }
    for (int i = 0; i <= 5; ++i) {
        const double v = double(i) / 5.0;
        out << "<line x1=\"" << fmt(L - 5) << "\" y1=\"" << fmt(Y(v)) << "\" x2=\"" << fmt(L)
            << "\" y2=\"" << fmt(Y(v)) << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << fmt(L - 10) << "\" y=\"" << fmt(Y(v) + 4)
            << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"end\">" << fmt(v)
            << "</text>\n";
    }
    out << "<text x=\"" << fmt((L + R) / 2) << "\" y=\"" << fmt(B + 45)
        << "\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">training "
           "samples per class</text>\n";
    out << "<text x=\"18\" y=\"" << fmt((T + B) / 2)
        << "\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\" "
           "transform=\"rotate(-90 18 "
        << fmt((T + B) / 2) << ")\">test accuracy</text>\n";

    for (size_t ai = 0; ai < archs.size(); ++ai) {
        const char* color = kPalette[ai % 6];
        // min-max band
        out << "<polygon fill=\"" << color << "\" fill-opacity=\"0.25\" stroke=\"none\" points=\"";
        for (size_t i = 0; i < xs.size(); ++i)
            out << fmt(X(xs[i])) << "," << fmt(Y(series[ai].hi[i])) << " ";
        for (size_t i = xs.size(); i-- > 0;)
            out << fmt(X(xs[i])) << "," << fmt(Y(series[ai].lo[i])) << " ";
        out << "\"/>\n";
        // mean line
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
        for (size_t i = 0; i < xs.size(); ++i)
            out << fmt(X(xs[i])) << "," << fmt(Y(series[ai].mean[i])) << " ";
        out << "\"/>\n";
        // legend
        const double ly = T + 20 + 22 * double(ai);
        out << "<line x1=\"" << fmt(R + 15) << "\" y1=\"" << fmt(ly) << "\" x2=\""
            << fmt(R + 45) << "\" y2=\"" << fmt(ly) << "\" stroke=\"" << color
            << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << fmt(R + 50) << "\" y=\"" << fmt(ly + 4)
            << "\" font-family=\"sans-serif\" font-size=\"12\">" << archs[ai] << "</text>\n";
    }
    out << "</svg>\n";
    if (!out) throw DataError("short write to " + out_svg);
}

PretrainResult pretrain_backbone(const LabeledDataset& source, const ArchSpec& arch,
                                 const TrainConfig& train_cfg, double val_fraction,
                                 const std::string& out_weights) {
    if (source.items.empty()) throw DataError("pretrain: source corpus is empty");
    if (is_frozen_arch(arch.arch_id))
        throw ConfigError("pretrain: use a trainable arch, not " + arch.arch_id);

    ArchSpec spec = arch;
    spec.outputs = source.num_classes();
    Model model = build_model<float>(spec);

    const std::vector<int> labels = source.labels();
    std::map<int, int64_t> counts;
    for (int l : labels) ++counts[l];
    int64_t min_class = int64_t(source.items.size());
    for (auto& [cls, cnt] : counts) min_class = std::min(min_class, cnt);
    const int val_n =
        std::max(1, int(std::llround(std::max(0.05, val_fraction) * double(min_class))));
    const int train_n = int(min_class) - val_n;
    if (train_n < 1) throw DataError("pretrain: not enough samples per class");

    SplitIndices split = stratified_split(labels, train_n, double(val_n) / double(train_n), 0,
                                          child_seed(train_cfg.seed, 77));

    const int channels = int(model.input_shape()[0]);
    ImageView train_v(source, split.train, channels);
    ImageView val_v(source, split.val, channels);

    PretrainResult result;
    result.report = train_model(model, train_v, val_v, train_cfg);
    for (const auto& e : result.report.epochs)
        result.best_val_accuracy = std::max(result.best_val_accuracy, e.val_acc);
    save_backbone_weights(model, out_weights);
    result.weights_path = out_weights;
    return result;
}

} // namespace dnet
