#include "dnet/data.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "dnet/errors.hpp"
#include "dnet/hash.hpp"

namespace fs = std::filesystem;

namespace dnet {

void write_manifest(const DatasetManifest& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    out << "# kind=" << m.kind << " count=" << m.count << " seed=" << m.seed
        << " canvas=" << m.canvas << "\n";
    out << "filename,label,seed\n";
    for (const auto& r : m.rows) out << r.filename << "," << r.label << "," << r.seed << "\n";
    if (!out) throw DataError("short write to " + path);
}

DatasetManifest read_manifest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    DatasetManifest m;
    std::string line;
    bool saw_columns = false;
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
                    if (key == "kind") m.kind = val;
                    else if (key == "count") m.count = std::stoll(val);
                    else if (key == "seed") m.seed = std::stoull(val);
                    else if (key == "canvas") m.canvas = std::stoi(val);
                } catch (...) {
                    throw DataError("manifest: bad header value " + kv);
                }
            }
            continue;
        }
        if (!saw_columns) {
            if (line != "filename,label,seed")
                throw DataError("manifest: unexpected column row '" + line + "'");
            saw_columns = true;
            continue;
        }
        const auto c1 = line.find(',');
        const auto c2 = line.find(',', c1 == std::string::npos ? c1 : c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos)
            throw DataError("manifest: malformed row '" + line + "'");
        ManifestRow r;
        r.filename = line.substr(0, c1);
        r.label = line.substr(c1 + 1, c2 - c1 - 1);
        try {
            r.seed = std::stoull(line.substr(c2 + 1));
        } catch (...) {
            throw DataError("manifest: bad seed in row '" + line + "'");
        }
        m.rows.push_back(std::move(r));
    }
    if (!saw_columns) throw DataError("manifest: missing column row in " + path);
    if (m.count != int64_t(m.rows.size()))
        throw DataError("manifest: header count " + std::to_string(m.count) + " != " +
                        std::to_string(m.rows.size()) + " rows");
    return m;
}

namespace {

LabeledDataset assemble(std::vector<std::pair<std::string, std::string>> file_label,
                        const std::string& base_dir) {
    LabeledDataset ds;
    for (const auto& [file, label] : file_label)
        if (std::find(ds.label_names.begin(), ds.label_names.end(), label) ==
            ds.label_names.end())
            ds.label_names.push_back(label);
    std::sort(ds.label_names.begin(), ds.label_names.end());

    ds.items.reserve(file_label.size());
    for (const auto& [file, label] : file_label) {
        LabeledExample e;
        e.filename = file;
        e.image = read_pnm((fs::path(base_dir) / file).string());
        e.label = int(std::lower_bound(ds.label_names.begin(), ds.label_names.end(), label) -
                      ds.label_names.begin());
        e.content_hash = fnv1a64(e.image.pixels.data(), e.image.pixels.size());
        ds.items.push_back(std::move(e));
    }
    return ds;
}

} // namespace

LabeledDataset load_manifest_dataset(const std::string& dir) {
    const DatasetManifest m = read_manifest((fs::path(dir) / "manifest.csv").string());
    std::vector<std::pair<std::string, std::string>> file_label;
    file_label.reserve(m.rows.size());
    for (const auto& r : m.rows) file_label.emplace_back(r.filename, r.label);
    return assemble(std::move(file_label), dir);
}

IngestResult ingest_directory(const std::string& root) {
    if (!fs::is_directory(root)) throw DataError("not a directory: " + root);
    std::vector<std::string> class_dirs;
    for (const auto& entry : fs::directory_iterator(root))
        if (entry.is_directory()) class_dirs.push_back(entry.path().filename().string());
    std::sort(class_dirs.begin(), class_dirs.end());
    if (class_dirs.empty()) throw DataError("no class subdirectories in " + root);

    IngestResult result;
    std::vector<std::pair<std::string, std::string>> file_label;
    for (const auto& label : class_dirs) {
        std::vector<std::string> files;
        for (const auto& entry : fs::directory_iterator(fs::path(root) / label)) {
            if (!entry.is_regular_file()) continue;
            const std::string ext = entry.path().extension().string();
            if (ext == ".pgm" || ext == ".ppm" || ext == ".pnm") {
                files.push_back(entry.path().filename().string());
            } else {
                ++result.skipped;
            }
        }
        if (files.empty()) throw DataError("empty class directory: " + label);
        std::sort(files.begin(), files.end());
        for (auto& f : files) file_label.emplace_back((fs::path(label) / f).string(), label);
    }
    result.dataset = assemble(std::move(file_label), root);
    return result;
}

} // namespace dnet
