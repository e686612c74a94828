#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hamnet/synth.hpp"

namespace hamnet {

enum class BinaryLabel { Clean, Noisy };

inline constexpr double kCleanThresholdDb = 20.0;
inline constexpr double kNoisyThresholdDb = 5.0;

/// clean when snr is CLEAN or >= 20 dB, noisy when <= 5 dB, otherwise
/// excluded from binary training sets (nullopt).
std::optional<BinaryLabel> binary_label_for(const SnrSetting& snr_db) noexcept;

std::string to_string(BinaryLabel label);

/// One manifest line.
struct DatasetRecord {
  std::string id;
  std::string path;  // relative to the manifest's directory
  SignalClass signal_class = SignalClass::CW;
  SnrSetting snr_db;
  std::uint64_t seed = 0;
  double duration_s = 1.0;
  int sample_rate = kDefaultSampleRate;
  std::optional<BinaryLabel> binary_label;

  std::size_t expected_samples() const;
  friend bool operator==(const DatasetRecord&, const DatasetRecord&) = default;
};

nlohmann::ordered_json to_json(const DatasetRecord& record);

/// Strict parse: exactly the eight manifest keys with the documented types.
DatasetRecord record_from_json(const nlohmann::json& j);

/// Serialises one record per line, "\n"-terminated.
std::string manifest_to_jsonl(const std::vector<DatasetRecord>& records);
void write_manifest(const std::filesystem::path& path, const std::vector<DatasetRecord>& records);

/// Throws Io when the file cannot be read and Format on the first bad line.
std::vector<DatasetRecord> read_manifest(const std::filesystem::path& path);

/// The generator spec from which the record's signal was rendered.
SignalSpec signal_spec_for(const DatasetRecord& record);

struct DatasetConfig {
  std::vector<SignalClass> classes;
  std::size_t count_per_cell = 1;   // records per (class, snr) pair
  std::vector<SnrSetting> snr_grid{std::nullopt};
  double duration_s = 1.0;
  int sample_rate = kDefaultSampleRate;
  std::uint64_t seed = 0;
};

/// Writes signals/<id>.f32 and manifest.jsonl under out_dir and returns the
/// records. Record i is seeded with derive_seed(config.seed, i).
std::vector<DatasetRecord> synth_dataset(const DatasetConfig& config,
                                         const std::filesystem::path& out_dir);

}  // namespace hamnet
