#include "hamnet/nn/serialize.hpp"

#include <bit>
#include <cstring>
#include <string>

#include <json.hpp>

#include "hamnet/audio_io.hpp"
#include "hamnet/error.hpp"

namespace hamnet::nn {

using nlohmann::json;
using nlohmann::ordered_json;

static_assert(std::endian::native == std::endian::little, "model codec assumes a little-endian host");

std::vector<std::uint8_t> encode_model(const Model& model) {
  ordered_json header;
  header["format_version"] = kModelFormatVersion;
  header["input_shape"] = model.input_shape();
  header["layers"] = ordered_json::array();
  for (const auto& spec : model.layers()) header["layers"].push_back(spec.to_json());
  header["tensors"] = ordered_json::array();

  std::vector<std::uint8_t> blob;
  for (std::size_t l = 0; l < model.params().size(); ++l) {
    for (std::size_t s = 0; s < model.params()[l].size(); ++s) {
      const auto& t = model.params()[l][s];
      header["tensors"].push_back({{"name", Model::param_name(l, s)},
                                   {"shape", t.shape()},
                                   {"offset", blob.size()},
                                   {"length", t.size() * 4}});
      for (double v : t.values()) {
        const auto f = static_cast<float>(v);
        std::uint8_t b[4];
        std::memcpy(b, &f, 4);
        blob.insert(blob.end(), b, b + 4);
      }
    }
  }
  const std::string text = header.dump();
  std::vector<std::uint8_t> out(kModelMagic.begin(), kModelMagic.end());
  const std::uint64_t len = text.size();
  std::uint8_t lb[8];
  std::memcpy(lb, &len, 8);
  out.insert(out.end(), lb, lb + 8);
  out.insert(out.end(), text.begin(), text.end());
  out.insert(out.end(), blob.begin(), blob.end());
  return out;
}

Model decode_model(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < kModelMagic.size() ||
      std::memcmp(bytes.data(), kModelMagic.data(), kModelMagic.size()) != 0) {
    fail(ErrorKind::FormatMagic, "not a model file: missing \"HAMNN1\" magic");
  }
  const std::size_t prefix = kModelMagic.size() + 8;
  if (bytes.size() < prefix) {
    fail(ErrorKind::FormatTruncated, "model file truncated in header length: expected at least " +
                                         std::to_string(prefix) + " bytes, found " + std::to_string(bytes.size()));
  }
  std::uint64_t header_len;
  std::memcpy(&header_len, bytes.data() + kModelMagic.size(), 8);
  if (header_len > bytes.size() - prefix) {
    fail(ErrorKind::FormatTruncated, "model header truncated: expected " + std::to_string(header_len) +
                                         " bytes, found " + std::to_string(bytes.size() - prefix));
  }
  json header;
  try {
    header = json::parse(bytes.begin() + static_cast<std::ptrdiff_t>(prefix),
                         bytes.begin() + static_cast<std::ptrdiff_t>(prefix + header_len));
  } catch (const json::exception& e) {
    fail(ErrorKind::Format, std::string("model header is not valid JSON: ") + e.what());
  }

  try {
    const int version = header.at("format_version").get<int>();
    if (version != kModelFormatVersion) {
      fail(ErrorKind::FormatVersion, "unsupported model format_version " + std::to_string(version) +
                                         " (this build reads version " + std::to_string(kModelFormatVersion) + ")");
    }
    std::vector<LayerSpec> layers;
    for (const auto& l : header.at("layers")) layers.push_back(LayerSpec::from_json(l));
    Model model(header.at("input_shape").get<Shape>(), std::move(layers));

    const auto& tensors = header.at("tensors");
    std::size_t expected_tensors = 0;
    for (const auto& layer : model.params()) expected_tensors += layer.size();
    if (tensors.size() != expected_tensors) {
      fail(ErrorKind::Format, "model header lists " + std::to_string(tensors.size()) + " tensors, architecture needs " +
                                  std::to_string(expected_tensors));
    }
    const std::size_t blob_start = prefix + header_len;
    const std::size_t blob_available = bytes.size() - blob_start;
    std::size_t blob_needed = 0;
    for (const auto& t : tensors) blob_needed = std::max(blob_needed, t.at("offset").get<std::size_t>() + t.at("length").get<std::size_t>());
    if (blob_available < blob_needed) {
      fail(ErrorKind::FormatTruncated, "model weight blob truncated: expected " + std::to_string(blob_needed) +
                                           " bytes, found " + std::to_string(blob_available));
    }
    if (blob_available > blob_needed) {
      fail(ErrorKind::Format, "model file has " + std::to_string(blob_available - blob_needed) +
                                  " unexpected trailing bytes");
    }

    std::size_t ti = 0;
    for (std::size_t l = 0; l < model.params().size(); ++l) {
      for (std::size_t s = 0; s < model.params()[l].size(); ++s, ++ti) {
        auto& param = model.params()[l][s];
        const auto& t = tensors[ti];
        if (t.at("name").get<std::string>() != Model::param_name(l, s) || t.at("shape").get<Shape>() != param.shape() ||
            t.at("length").get<std::size_t>() != param.size() * 4) {
          fail(ErrorKind::Format, "tensor entry " + std::to_string(ti) + " does not match " + Model::param_name(l, s) +
                                      " " + shape_string(param.shape()));
        }
        const std::size_t off = blob_start + t.at("offset").get<std::size_t>();
        for (std::size_t i = 0; i < param.size(); ++i) {
          float f;
          std::memcpy(&f, bytes.data() + off + 4 * i, 4);
          param[i] = f;
        }
      }
    }
    return model;
  } catch (const json::exception& e) {
    fail(ErrorKind::Format, std::string("malformed model header: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Parameter) fail(ErrorKind::Format, std::string("invalid architecture: ") + e.what());
    throw;
  }
}

void save_model(const Model& model, const std::filesystem::path& path) {
  write_file_bytes(path, encode_model(model));
}

Model load_model(const std::filesystem::path& path) { return decode_model(read_file_bytes(path)); }

}  // namespace hamnet::nn
