#pragma once

#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

#include "hamnet/nn/model.hpp"

namespace hamnet::nn {

/// Container layout:
///   "HAMNN1\n" (7 bytes)
///   u64 little-endian header length
///   UTF-8 JSON header: format_version, input_shape, layers, tensors
///     (name, shape, offset, length; offsets relative to the blob start)
///   parameter blob: little-endian float32, row-major, in manifest order
inline constexpr std::string_view kModelMagic = "HAMNN1\n";
inline constexpr int kModelFormatVersion = 1;

std::vector<std::uint8_t> encode_model(const Model& model);

/// Errors: FormatMagic, FormatVersion, FormatTruncated (naming expected vs
/// actual lengths) or Format for a malformed header.
Model decode_model(const std::vector<std::uint8_t>& bytes);

void save_model(const Model& model, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);

}  // namespace hamnet::nn
