#include "dnet/features.hpp"

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "dnet/weights.hpp"

namespace fs = std::filesystem;

namespace dnet {

FeatureCache FeatureCache::open(const std::string& dir) {
    FeatureCache cache;
    const fs::path index = fs::path(dir) / "index.txt";
    const fs::path payload = fs::path(dir) / "features.f32";
    if (!fs::exists(index)) return cache;

    std::ifstream in(index);
    if (!in) throw DataError("feature cache: cannot open " + index.string());
    std::string tag, ver, kv;
    in >> tag >> ver;
    if (tag != "FCACHE" || ver != "v1")
        throw DataError("feature cache: bad index header in " + index.string());
    uint64_t fp = 0;
    int64_t dim = 0;
    for (int i = 0; i < 2; ++i) {
        in >> kv;
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw DataError("feature cache: bad index header");
        const std::string key = kv.substr(0, eq);
        const std::string val = kv.substr(eq + 1);
        if (key == "fingerprint") fp = std::stoull(val);
        else if (key == "dim") dim = std::stoll(val);
        else throw DataError("feature cache: unknown header key " + key);
    }
    if (dim < 1) throw DataError("feature cache: bad dim");

    std::ifstream pay(payload, std::ios::binary);
    if (!pay) throw DataError("feature cache: missing payload " + payload.string());
    std::vector<float> all;
    {
        pay.seekg(0, std::ios::end);
        const auto bytes = pay.tellg();
        pay.seekg(0);
        if (bytes % 4 != 0) throw DataError("feature cache: payload size not float-aligned");
        all.resize(size_t(bytes) / 4);
        pay.read(reinterpret_cast<char*>(all.data()), bytes);
        if (pay.gcount() != bytes) throw DataError("feature cache: truncated payload");
    }

    cache.fingerprint_ = fp;
    cache.dim_ = dim;
    uint64_t hash = 0, offset = 0, count = 0;
    while (in >> hash >> offset >> count) {
        if (int64_t(count) != dim || offset + count > all.size())
            throw DataError("feature cache: entry out of range");
        std::vector<float> v(all.begin() + int64_t(offset), all.begin() + int64_t(offset + count));
        cache.entries_.emplace(hash, std::move(v));
    }
    return cache;
}

void FeatureCache::reset(uint64_t fingerprint, int64_t dim) {
    std::lock_guard<std::mutex> lock(*mu_);
    fingerprint_ = fingerprint;
    dim_ = dim;
    entries_.clear();
}

void FeatureCache::ensure_fingerprint(uint64_t fingerprint, int64_t dim) {
    std::lock_guard<std::mutex> lock(*mu_);
    if (fingerprint_ == fingerprint && dim_ == dim) return;
    fingerprint_ = fingerprint;
    dim_ = dim;
    entries_.clear();
}

const std::vector<float>* FeatureCache::find(uint64_t image_hash) const {
    std::lock_guard<std::mutex> lock(*mu_);
    auto it = entries_.find(image_hash);
    return it == entries_.end() ? nullptr : &it->second;
}

void FeatureCache::put(uint64_t image_hash, std::vector<float> v) {
    std::lock_guard<std::mutex> lock(*mu_);
    if (int64_t(v.size()) != dim_)
        throw ConfigError("feature cache: vector dim mismatch");
    entries_[image_hash] = std::move(v);
}

void FeatureCache::save(const std::string& dir) const {
    std::lock_guard<std::mutex> lock(*mu_);
    fs::create_directories(dir);
    const fs::path index = fs::path(dir) / "index.txt";
    const fs::path payload = fs::path(dir) / "features.f32";
    const fs::path index_tmp = index.string() + ".tmp";
    const fs::path payload_tmp = payload.string() + ".tmp";

    {
        std::ofstream pay(payload_tmp, std::ios::binary);
        std::ofstream idx(index_tmp);
        if (!pay || !idx) throw DataError("feature cache: cannot write to " + dir);
        idx << "FCACHE v1 fingerprint=" << fingerprint_ << " dim=" << dim_ << "\n";
        uint64_t offset = 0;
        for (const auto& [hash, v] : entries_) {
            pay.write(reinterpret_cast<const char*>(v.data()),
                      std::streamsize(v.size() * 4));
            idx << hash << " " << offset << " " << v.size() << "\n";
            offset += v.size();
        }
        if (!pay || !idx) throw DataError("feature cache: short write to " + dir);
    }
    fs::rename(payload_tmp, payload);
    fs::rename(index_tmp, index);
}

Tensor extract_features(Model& model, const LabeledDataset& ds,
                        const std::vector<size_t>& indices, FeatureCache* cache) {
    const int64_t gap = model.find_kind("global_avg_pool");
    if (gap < 0) throw ConfigError("extract_features: model has no global_avg_pool layer");
    Model trunk = model.slice(0, size_t(gap) + 1);

    if (indices.empty()) throw DataError("extract_features: no images selected");
    const uint64_t fp = backbone_fingerprint(model);
    const int channels = int(model.input_shape()[0]);

    // Feature dimension = channel count entering GAP.
    int64_t dim = -1;
    if (cache) {
        if (!cache->empty() && cache->fingerprint() != fp)
            throw DataError("feature cache fingerprint mismatch: cache " +
                            std::to_string(cache->fingerprint()) + ", backbone " +
                            std::to_string(fp));
    }

    Tensor out;
    for (size_t row = 0; row < indices.size(); ++row) {
        const LabeledExample& ex = ds.items[indices[row]];
        const std::vector<float>* hit = cache ? cache->find(ex.content_hash) : nullptr;
        std::vector<float> computed;
        const std::vector<float>* vec = hit;
        if (!hit) {
            Tensor x = to_input_tensor(ex.image, channels);
            Tensor f = trunk.forward(x, Mode::eval, nullptr);
            if (f.shape().rank != 2 || f.shape()[0] != 1)
                throw ShapeError("extract_features: unexpected GAP output shape");
            computed.assign(f.data(), f.data() + f.numel());
            vec = &computed;
        }
        if (dim < 0) {
            dim = int64_t(vec->size());
            if (cache && cache->empty()) cache->reset(fp, dim);
            out = Tensor(Shape{int64_t(indices.size()), dim});
        }
        if (int64_t(vec->size()) != dim)
            throw ShapeError("extract_features: inconsistent feature dims");
        std::memcpy(out.data() + int64_t(row) * dim, vec->data(), size_t(dim) * 4);
        if (cache && !hit) cache->put(ex.content_hash, std::move(computed));
    }
    return out;
}

} // namespace dnet
