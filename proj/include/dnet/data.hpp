#ifndef DNET_DATA_HPP
#define DNET_DATA_HPP

#include <string>
#include <vector>

#include "dnet/image.hpp"

namespace dnet {

struct ManifestRow {
    std::string filename;
    std::string label;
    uint64_t seed = 0;
};

// CSV with a '#' provenance header line; columns filename,label,seed.
struct DatasetManifest {
    std::string kind; // uml | shapes | ingested
    int64_t count = 0;
    uint64_t seed = 0;
    int canvas = 0;
    std::vector<ManifestRow> rows;
};

void write_manifest(const DatasetManifest& m, const std::string& path);
DatasetManifest read_manifest(const std::string& path);

struct LabeledExample {
    Image image;
    int label = 0; // index into label_names
    std::string filename;
    uint64_t content_hash = 0; // FNV-1a over the decoded pixel bytes
};

struct LabeledDataset {
    std::vector<LabeledExample> items;
    std::vector<std::string> label_names; // sorted

    std::vector<int> labels() const {
        std::vector<int> out;
        out.reserve(items.size());
        for (const auto& e : items) out.push_back(e.label);
        return out;
    }
    int num_classes() const { return int(label_names.size()); }
};

// Loads images listed in <dir>/manifest.csv.
LabeledDataset load_manifest_dataset(const std::string& dir);

struct IngestResult {
    LabeledDataset dataset;
    int skipped = 0; // files with unrecognised extensions
};

// root/<label>/*.pgm|*.ppm, stable lexicographic order. Errors on empty
// class directories and unreadable files; unknown extensions are skipped
// and counted.
IngestResult ingest_directory(const std::string& root);

} // namespace dnet

#endif
