#ifndef DNET_HASH_HPP
#define DNET_HASH_HPP

#include <cstddef>
#include <cstdint>

namespace dnet {

inline constexpr uint64_t kFnvOffsetBasis = 14695981039346656037ull;
inline constexpr uint64_t kFnvPrime = 1099511628211ull;

// FNV-1a over a byte range; `state` allows incremental hashing.
inline uint64_t fnv1a64(const void* data, size_t n, uint64_t state = kFnvOffsetBasis) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < n; ++i) {
        state ^= uint64_t(p[i]);
        state *= kFnvPrime;
    }
    return state;
}

} // namespace dnet

#endif
