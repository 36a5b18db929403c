#include "dnet/weights.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "dnet/hash.hpp"

namespace dnet {

namespace {

constexpr uint32_t kVersion = 1;

void put_u32(std::string& out, uint32_t v) {
    for (int i = 0; i < 4; ++i) out += char((v >> (8 * i)) & 0xff);
}
void put_u64(std::string& out, uint64_t v) {
    for (int i = 0; i < 8; ++i) out += char((v >> (8 * i)) & 0xff);
}

Shape parse_shape(const std::string& s) {
    std::vector<int64_t> dims;
    std::string cur;
    for (char c : s + "x") {
        if (c == 'x') {
            if (cur.empty()) throw DataError("weights: bad shape '" + s + "'");
            dims.push_back(std::stoll(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (dims.empty() || dims.size() > 4) throw DataError("weights: bad shape '" + s + "'");
    Shape out;
    out.rank = int(dims.size());
    for (size_t i = 0; i < dims.size(); ++i) {
        if (dims[i] < 1) throw DataError("weights: bad shape '" + s + "'");
        out.d[i] = dims[i];
    }
    return out;
}

std::vector<ParamT<float>*> backbone_params(Model& model) {
    const int64_t gap = model.find_kind("global_avg_pool");
    if (gap < 0) throw ConfigError("model has no global_avg_pool layer");
    std::vector<ParamT<float>*> out;
    for (size_t i = 0; i < size_t(gap); ++i)
        for (auto* p : model.layer(i).params()) out.push_back(p);
    return out;
}

void save_params(Model& model, const std::vector<ParamT<float>*>& params,
                 const std::string& path) {
    std::string header;
    header += "arch: " + model.arch_id() + "\n";
    header += "input: " + model.input_shape().str() + "\n";
    uint64_t offset = 0;
    for (auto* p : params) {
        header += "tensor: " + p->name + " f32 " + p->value.shape().str() + " " +
                  std::to_string(offset) + "\n";
        offset += uint64_t(p->value.numel()) * 4;
    }

    std::string blob = "NNWT";
    put_u32(blob, kVersion);
    put_u64(blob, uint64_t(header.size()));
    blob += header;

    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    out.write(blob.data(), std::streamsize(blob.size()));
    for (auto* p : params) {
        static_assert(sizeof(float) == 4);
        out.write(reinterpret_cast<const char*>(p->value.data()),
                  std::streamsize(p->value.numel() * 4));
    }
    if (!out) throw DataError("short write to " + path);
}

struct ParsedFile {
    WeightFileInfo info;
    std::vector<char> payload;
};

ParsedFile parse_file(const std::string& path, bool want_payload) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);

    char magic[4];
    in.read(magic, 4);
    if (in.gcount() != 4 || std::memcmp(magic, "NNWT", 4) != 0)
        throw DataError("weights: bad magic in " + path);
    unsigned char raw[8];
    in.read(reinterpret_cast<char*>(raw), 4);
    if (in.gcount() != 4) throw DataError("weights: truncated version in " + path);
    uint32_t version = 0;
    for (int i = 0; i < 4; ++i) version |= uint32_t(raw[i]) << (8 * i);
    if (version != kVersion)
        throw DataError("weights: unsupported version " + std::to_string(version));
    in.read(reinterpret_cast<char*>(raw), 8);
    if (in.gcount() != 8) throw DataError("weights: truncated header length");
    uint64_t header_len = 0;
    for (int i = 0; i < 8; ++i) header_len |= uint64_t(raw[i]) << (8 * i);

    std::string header(header_len, '\0');
    in.read(header.data(), std::streamsize(header_len));
    if (uint64_t(in.gcount()) != header_len) throw DataError("weights: truncated header");

    ParsedFile pf;
    std::istringstream hs(header);
    std::string line;
    while (std::getline(hs, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "arch:") {
            ls >> pf.info.arch_id;
        } else if (key == "input:") {
            std::string s;
            ls >> s;
            pf.info.input_shape = parse_shape(s);
        } else if (key == "tensor:") {
            TensorEntry e;
            std::string dtype, shape_s;
            ls >> e.name >> dtype >> shape_s >> e.offset;
            if (!ls || dtype != "f32")
                throw DataError("weights: bad tensor line '" + line + "'");
            e.shape = parse_shape(shape_s);
            pf.info.entries.push_back(std::move(e));
        } else {
            throw DataError("weights: unknown header key '" + key + "'");
        }
    }

    // offsets ascending and non-overlapping, bytes sum to the payload length
    uint64_t expect = 0;
    for (const auto& e : pf.info.entries) {
        if (e.offset != expect)
            throw DataError("weights: tensor " + e.name + " offset " +
                            std::to_string(e.offset) + " overlaps or leaves a gap (expected " +
                            std::to_string(expect) + ")");
        expect += uint64_t(e.shape.numel()) * 4;
    }
    pf.info.payload_bytes = expect;

    if (want_payload) {
        pf.payload.resize(expect);
        in.read(pf.payload.data(), std::streamsize(expect));
        if (uint64_t(in.gcount()) != expect)
            throw DataError("weights: truncated payload in " + path);
    }
    return pf;
}

} // namespace

void save_weights(Model& model, const std::string& path) {
    save_params(model, model.params(), path);
}

void save_backbone_weights(Model& model, const std::string& path) {
    save_params(model, backbone_params(model), path);
}

WeightFileInfo inspect_weights(const std::string& path) {
    return parse_file(path, false).info;
}

LoadReport load_weights(Model& model, const std::string& path, LoadMode mode) {
    ParsedFile pf = parse_file(path, true);
    auto params = model.params();

    LoadReport report;
    std::vector<std::pair<ParamT<float>*, const TensorEntry*>> plan;
    std::vector<bool> entry_used(pf.info.entries.size(), false);

    for (auto* p : params) {
        const TensorEntry* found = nullptr;
        for (size_t i = 0; i < pf.info.entries.size(); ++i) {
            if (pf.info.entries[i].name == p->name) {
                found = &pf.info.entries[i];
                entry_used[i] = true;
                break;
            }
        }
        if (!found) {
            report.missing_in_file.push_back(p->name);
            continue;
        }
        if (found->shape != p->value.shape())
            throw DataError("weights: tensor " + p->name + " has shape " + found->shape.str() +
                            " in file, model expects " + p->value.shape().str());
        plan.emplace_back(p, found);
    }
    for (size_t i = 0; i < pf.info.entries.size(); ++i)
        if (!entry_used[i]) report.extra_in_file.push_back(pf.info.entries[i].name);

    if (mode == LoadMode::strict) {
        if (!report.missing_in_file.empty() || !report.extra_in_file.empty())
            throw DataError("weights: strict load mismatch (" +
                            std::to_string(report.missing_in_file.size()) + " missing, " +
                            std::to_string(report.extra_in_file.size()) + " extra)");
    }

    // Validate payload values before touching the model.
    for (auto& [p, e] : plan) {
        const float* vals = reinterpret_cast<const float*>(pf.payload.data() + e->offset);
        for (int64_t i = 0; i < p->value.numel(); ++i)
            if (!std::isfinite(double(vals[i])))
                throw NumericError("weights: non-finite values in tensor " + p->name);
    }
    for (auto& [p, e] : plan) {
        std::memcpy(p->value.data(), pf.payload.data() + e->offset,
                    size_t(p->value.numel()) * 4);
        report.loaded.push_back(p->name);
    }
    return report;
}

uint64_t model_fingerprint(Model& model) {
    uint64_t h = kFnvOffsetBasis;
    for (auto* p : model.params())
        h = fnv1a64(p->value.data(), size_t(p->value.numel()) * 4, h);
    return h;
}

uint64_t backbone_fingerprint(Model& model) {
    uint64_t h = kFnvOffsetBasis;
    for (auto* p : backbone_params(model))
        h = fnv1a64(p->value.data(), size_t(p->value.numel()) * 4, h);
    return h;
}

} // namespace dnet
