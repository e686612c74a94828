#include "hamnet/dataset.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "hamnet/audio_io.hpp"
#include "hamnet/error.hpp"
#include "hamnet/rng.hpp"

namespace hamnet {

using nlohmann::json;
using nlohmann::ordered_json;

std::optional<BinaryLabel> binary_label_for(const SnrSetting& snr_db) noexcept {
  if (!snr_db || *snr_db >= kCleanThresholdDb) return BinaryLabel::Clean;
  if (*snr_db <= kNoisyThresholdDb) return BinaryLabel::Noisy;
  return std::nullopt;
}

std::string to_string(BinaryLabel label) { return label == BinaryLabel::Clean ? "clean" : "noisy"; }

std::size_t DatasetRecord::expected_samples() const {
  return static_cast<std::size_t>(std::llround(duration_s * sample_rate));
}

ordered_json to_json(const DatasetRecord& r) {
  ordered_json j;
  j["id"] = r.id;
  j["path"] = r.path;
  j["class"] = std::string(to_string(r.signal_class));
  j["snr_db"] = r.snr_db ? ordered_json(*r.snr_db) : ordered_json("clean");
  j["seed"] = r.seed;
  j["duration_s"] = r.duration_s;
  j["sample_rate"] = r.sample_rate;
  j["binary_label"] = r.binary_label ? ordered_json(to_string(*r.binary_label)) : ordered_json(nullptr);
  return j;
}

DatasetRecord record_from_json(const json& j) {
  static const std::set<std::string> keys = {"id",         "path",        "class",       "snr_db",
                                             "seed",       "duration_s",  "sample_rate", "binary_label"};
  if (!j.is_object()) fail(ErrorKind::Format, "manifest record is not a JSON object");
  for (const auto& [k, v] : j.items()) {
    if (!keys.contains(k)) fail(ErrorKind::Format, "unknown manifest key '" + k + "'");
  }
  for (const auto& k : keys) {
    if (!j.contains(k)) fail(ErrorKind::Format, "manifest record lacks key '" + k + "'");
  }
  auto expect = [&](bool ok, const char* key) {
    if (!ok) fail(ErrorKind::Format, std::string("manifest key '") + key + "' has the wrong type");
  };
  DatasetRecord r;
  expect(j["id"].is_string(), "id");
  r.id = j["id"].get<std::string>();
  expect(j["path"].is_string(), "path");
  r.path = j["path"].get<std::string>();
  expect(j["class"].is_string(), "class");
  try {
    r.signal_class = parse_signal_class(j["class"].get<std::string>());
  } catch (const Error& e) {
    fail(ErrorKind::Format, e.what());
  }
  const auto& snr = j["snr_db"];
  if (snr.is_string()) {
    expect(snr.get<std::string>() == "clean", "snr_db");
  } else {
    expect(snr.is_number(), "snr_db");
    r.snr_db = snr.get<double>();
  }
  expect(j["seed"].is_number_unsigned() || (j["seed"].is_number_integer() && j["seed"].get<std::int64_t>() >= 0), "seed");
  r.seed = j["seed"].get<std::uint64_t>();
  expect(j["duration_s"].is_number(), "duration_s");
  r.duration_s = j["duration_s"].get<double>();
  expect(j["sample_rate"].is_number_integer(), "sample_rate");
  r.sample_rate = j["sample_rate"].get<int>();
  const auto& label = j["binary_label"];
  if (!label.is_null()) {
    expect(label.is_string(), "binary_label");
    const auto s = label.get<std::string>();
    if (s == "clean") {
      r.binary_label = BinaryLabel::Clean;
    } else if (s == "noisy") {
      r.binary_label = BinaryLabel::Noisy;
    } else {
      fail(ErrorKind::Format, "binary_label '" + s + "' is not clean, noisy or null");
    }
  }
  return r;
}

std::string manifest_to_jsonl(const std::vector<DatasetRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    out += to_json(r).dump();
    out += '\n';
  }
  return out;
}

void write_manifest(const std::filesystem::path& path, const std::vector<DatasetRecord>& records) {
  write_text_file(path, manifest_to_jsonl(records));
}

std::vector<DatasetRecord> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open manifest '" + path.string() + "'");
  std::vector<DatasetRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      records.push_back(record_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      fail(ErrorKind::Format, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      fail(ErrorKind::Format, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return records;
}

SignalSpec signal_spec_for(const DatasetRecord& record) {
  return make_signal_spec(record.signal_class, record.duration_s, record.sample_rate, record.snr_db,
                          record.seed);
}

std::vector<DatasetRecord> synth_dataset(const DatasetConfig& config,
                                         const std::filesystem::path& out_dir) {
  if (config.classes.empty()) fail(ErrorKind::Config, "dataset config lists no classes");
  if (config.snr_grid.empty()) fail(ErrorKind::Config, "dataset config has an empty snr_grid");
  if (config.count_per_cell == 0) fail(ErrorKind::Config, "count_per_cell must be at least 1");

  std::error_code ec;
  std::filesystem::create_directories(out_dir / "signals", ec);
  if (ec) fail(ErrorKind::Io, "cannot create '" + (out_dir / "signals").string() + "': " + ec.message());

  std::vector<DatasetRecord> records;
  std::uint64_t index = 0;
  for (auto cls : config.classes) {
    std::string prefix(to_string(cls));
    for (auto& ch : prefix) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    for (const auto& snr : config.snr_grid) {
      for (std::size_t i = 0; i < config.count_per_cell; ++i, ++index) {
        char id[64];
        std::snprintf(id, sizeof id, "%s_%06llu", prefix.c_str(), static_cast<unsigned long long>(index));
        DatasetRecord r;
        r.id = id;
        r.path = "signals/" + r.id + ".f32";
        r.signal_class = cls;
        r.snr_db = snr;
        r.seed = derive_seed(config.seed, index);
        r.duration_s = config.duration_s;
        r.sample_rate = config.sample_rate;
        r.binary_label = binary_label_for(snr);
        write_raw_f32(render(signal_spec_for(r)), out_dir / r.path);
        records.push_back(std::move(r));
      }
    }
  }
  write_manifest(out_dir / "manifest.jsonl", records);
  return records;
}

}  // namespace hamnet
