#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hamnet/signal.hpp"

namespace hamnet {

/// Headerless mono little-endian float32.
void write_raw_f32(const SampleBuffer& buf, const std::filesystem::path& path);
SampleBuffer read_raw_f32(const std::filesystem::path& path, int sample_rate);

/// Encodes a buffer as a canonical 44-byte-header PCM16 mono WAV.
/// Samples are clamped to [-1, 1], scaled by 32767 and rounded half away from zero.
std::vector<std::uint8_t> encode_wav(const SampleBuffer& buf);

/// Decodes PCM16 mono WAV bytes; samples are divided by 32768.
SampleBuffer decode_wav(const std::vector<std::uint8_t>& bytes);

void wav_write(const SampleBuffer& buf, const std::filesystem::path& path);
SampleBuffer wav_read(const std::filesystem::path& path);

/// Reads .wav through wav_read and anything else as raw float32.
SampleBuffer read_signal_file(const std::filesystem::path& path, int raw_sample_rate);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace hamnet
