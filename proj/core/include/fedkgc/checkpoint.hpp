#pragma once
// Weights container: 8-byte magic, u64 manifest length, JSON manifest
// (name, shape, dtype, offset per tensor), then raw little-endian float64
// payloads. Byte layout is fixed so identical weights serialize to
// identical files on any platform.

#include <filesystem>

#include "fedkgc/encoder.hpp"
#include "fedkgc/tensor.hpp"

namespace fedkgc {

void save_checkpoint(const ModelWeights& w, const std::filesystem::path& path);

// Throws DataError on missing file, bad magic, malformed manifest,
// truncated payload, duplicate names, or non-finite values.
ModelWeights load_checkpoint(const std::filesystem::path& path);

// Shape check against the experiment config: tok_emb is [V, d]; every
// rel_prefix/* tensor is [L_r, d] and only appears in parameterized mode;
// no other names. Throws DataError on mismatch.
void validate_weights(const ModelWeights& w, const EncoderConfig& cfg);

}  // namespace fedkgc
