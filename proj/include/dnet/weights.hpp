#ifndef DNET_WEIGHTS_HPP
#define DNET_WEIGHTS_HPP

#include <string>
#include <vector>

#include "dnet/model.hpp"

namespace dnet {

// NNWT container: magic "NNWT", u32 version = 1 (LE), u64 header length
// (LE), UTF-8 text header, then a contiguous little-endian f32 payload.
// Header lines:
//   arch: <arch-id>
//   input: <CxHxW>
//   tensor: <name> f32 <shape> <payload byte offset>
// Offsets are ascending and non-overlapping; the tensor bytes sum to the
// payload length.
struct TensorEntry {
    std::string name;
    Shape shape;
    uint64_t offset = 0;
};

struct WeightFileInfo {
    std::string arch_id;
    Shape input_shape;
    std::vector<TensorEntry> entries;
    uint64_t payload_bytes = 0;
};

enum class LoadMode { strict, by_name };

struct LoadReport {
    std::vector<std::string> loaded;
    std::vector<std::string> missing_in_file; // model params left at initialisation
    std::vector<std::string> extra_in_file;   // file entries with no model target
};

void save_weights(Model& model, const std::string& path);

// Saves only the parameters of layers before the GAP layer (the conv
// backbone); the classifier head is stripped.
void save_backbone_weights(Model& model, const std::string& path);

// strict: the file's tensor table must match the model's parameter list
// exactly. by_name: loads matching name+shape entries, leaves the rest at
// initialisation and reports both sides' leftovers. The model is not
// touched until the whole file has validated.
LoadReport load_weights(Model& model, const std::string& path, LoadMode mode);

// Parses and validates a file header without loading values.
WeightFileInfo inspect_weights(const std::string& path);

// FNV-1a over every parameter's f32 payload bytes, in parameter order.
uint64_t model_fingerprint(Model& model);

// Same, restricted to layers before the GAP layer.
uint64_t backbone_fingerprint(Model& model);

} // namespace dnet

#endif
