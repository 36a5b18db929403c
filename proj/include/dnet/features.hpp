#ifndef DNET_FEATURES_HPP
#define DNET_FEATURES_HPP

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "dnet/data.hpp"
#include "dnet/model.hpp"

namespace dnet {

// Post-GAP feature vectors keyed by (backbone fingerprint, image content
// hash). Disk layout under a directory:
//   index.txt    "FCACHE v1 fingerprint=<dec> dim=<C>" then one
//                "<image hash> <float offset> <count>" line per entry
//   features.f32 raw little-endian float payload
// Saves go through write-then-rename. Readers may share a cache; writes are
// serialised internally.
class FeatureCache {
public:
    FeatureCache() = default;

    static FeatureCache open(const std::string& dir); // empty cache if absent

    uint64_t fingerprint() const { return fingerprint_; }
    bool empty() const { return entries_.empty(); }
    size_t size() const { return entries_.size(); }
    int64_t dim() const { return dim_; }

    // Drops all entries and rebinds the cache to a backbone fingerprint.
    void reset(uint64_t fingerprint, int64_t dim);

    // Invalidates stale contents if the fingerprint changed.
    void ensure_fingerprint(uint64_t fingerprint, int64_t dim);

    const std::vector<float>* find(uint64_t image_hash) const;
    void put(uint64_t image_hash, std::vector<float> v);

    void save(const std::string& dir) const;

private:
    uint64_t fingerprint_ = 0;
    int64_t dim_ = 0;
    std::map<uint64_t, std::vector<float>> entries_;
    mutable std::unique_ptr<std::mutex> mu_ = std::make_unique<std::mutex>();
};

// Runs the model's layers up to and including GAP in eval mode over the
// selected images and returns the feature matrix [N x C]. A cache, when
// given, is consulted and populated; cached and freshly computed rows are
// bitwise identical. Errors if the cache is bound to a different backbone
// fingerprint.
Tensor extract_features(Model& model, const LabeledDataset& ds,
                        const std::vector<size_t>& indices, FeatureCache* cache);

} // namespace dnet

#endif
