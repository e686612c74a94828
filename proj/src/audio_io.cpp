#include "hamnet/audio_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <string>

#include "hamnet/error.hpp"

namespace hamnet {
namespace {

static_assert(std::endian::native == std::endian::little,
              "raw and WAV codecs assume a little-endian host");

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  std::uint8_t bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  out.insert(out.end(), bytes, bytes + sizeof(T));
}

template <typename T>
T get_le(const std::vector<std::uint8_t>& in, std::size_t offset) {
  T value;
  std::memcpy(&value, in.data() + offset, sizeof(T));
  return value;
}

bool tag_at(const std::vector<std::uint8_t>& in, std::size_t offset, const char* tag) {
  return in.size() >= offset + 4 && std::memcmp(in.data() + offset, tag, 4) == 0;
}

}  // namespace

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open '" + path.string() + "' for reading");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) fail(ErrorKind::Io, "read error on '" + path.string() + "'");
  return bytes;
}

void write_file_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorKind::Io, "write error on '" + path.string() + "'");
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  write_file_bytes(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

void write_raw_f32(const SampleBuffer& buf, const std::filesystem::path& path) {
  std::vector<std::uint8_t> bytes;
  bytes.reserve(buf.size() * 4);
  for (double v : buf.samples()) put_le(bytes, static_cast<float>(v));
  write_file_bytes(path, bytes);
}

SampleBuffer read_raw_f32(const std::filesystem::path& path, int sample_rate) {
  const auto bytes = read_file_bytes(path);
  if (bytes.empty() || bytes.size() % 4 != 0) {
    fail(ErrorKind::Format, "raw float32 file '" + path.string() + "' has length " +
                                std::to_string(bytes.size()) + ", not a positive multiple of 4");
  }
  std::vector<double> samples(bytes.size() / 4);
  for (std::size_t i = 0; i < samples.size(); ++i) samples[i] = get_le<float>(bytes, 4 * i);
  return SampleBuffer(std::move(samples), sample_rate);
}

std::vector<std::uint8_t> encode_wav(const SampleBuffer& buf) {
  const auto data_bytes = static_cast<std::uint32_t>(buf.size() * 2);
  const auto rate = static_cast<std::uint32_t>(buf.sample_rate());
  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  put_le<std::uint32_t>(out, 36 + data_bytes);
  out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  put_le<std::uint32_t>(out, 16);
  put_le<std::uint16_t>(out, 1);         // PCM
  put_le<std::uint16_t>(out, 1);         // mono
  put_le<std::uint32_t>(out, rate);
  put_le<std::uint32_t>(out, rate * 2);  // byte rate
  put_le<std::uint16_t>(out, 2);         // block align
  put_le<std::uint16_t>(out, 16);        // bits per sample
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  put_le<std::uint32_t>(out, data_bytes);
  for (double v : buf.samples()) {
    const double scaled = std::clamp(v, -1.0, 1.0) * 32767.0;
    put_le(out, static_cast<std::int16_t>(std::round(scaled)));  // std::round: half away from zero
  }
  return out;
}

SampleBuffer decode_wav(const std::vector<std::uint8_t>& bytes) {
  if (!tag_at(bytes, 0, "RIFF") || !tag_at(bytes, 8, "WAVE")) {
    fail(ErrorKind::Format, "not a RIFF/WAVE file");
  }
  std::size_t pos = 12;
  bool have_fmt = false;
  std::uint32_t rate = 0;
  while (pos + 8 <= bytes.size()) {
    const auto chunk_size = get_le<std::uint32_t>(bytes, pos + 4);
    const std::size_t body = pos + 8;
    if (tag_at(bytes, pos, "fmt ")) {
      if (chunk_size < 16 || body + 16 > bytes.size()) fail(ErrorKind::Format, "truncated fmt chunk");
      const auto format = get_le<std::uint16_t>(bytes, body);
      const auto channels = get_le<std::uint16_t>(bytes, body + 2);
      rate = get_le<std::uint32_t>(bytes, body + 4);
      const auto bits = get_le<std::uint16_t>(bytes, body + 14);
      if (format != 1) {
        fail(ErrorKind::Unsupported, "unsupported WAV audio_format=" + std::to_string(format) +
                                         " (only PCM, 1, is accepted)");
      }
      if (channels != 1) {
        fail(ErrorKind::Unsupported,
             "unsupported WAV channels=" + std::to_string(channels) + " (only mono is accepted)");
      }
      if (bits != 16) {
        fail(ErrorKind::Unsupported, "unsupported WAV bits_per_sample=" + std::to_string(bits) +
                                         " (only 16 is accepted)");
      }
      if (rate == 0) fail(ErrorKind::Format, "WAV sample_rate=0");
      have_fmt = true;
    } else if (tag_at(bytes, pos, "data")) {
      if (!have_fmt) fail(ErrorKind::Format, "WAV data chunk precedes fmt chunk");
      if (body + chunk_size > bytes.size()) fail(ErrorKind::Format, "truncated WAV data chunk");
      const std::size_t n = chunk_size / 2;
      if (n == 0) fail(ErrorKind::Format, "WAV holds no samples");
      std::vector<double> samples(n);
      for (std::size_t i = 0; i < n; ++i) samples[i] = get_le<std::int16_t>(bytes, body + 2 * i) / 32768.0;
      return SampleBuffer(std::move(samples), static_cast<int>(rate));
    }
    pos = body + chunk_size + (chunk_size & 1u);
  }
  fail(ErrorKind::Format, "WAV has no data chunk");
}

void wav_write(const SampleBuffer& buf, const std::filesystem::path& path) {
  write_file_bytes(path, encode_wav(buf));
}

SampleBuffer wav_read(const std::filesystem::path& path) { return decode_wav(read_file_bytes(path)); }

SampleBuffer read_signal_file(const std::filesystem::path& path, int raw_sample_rate) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".wav") return wav_read(path);
  return read_raw_f32(path, raw_sample_rate);
}

}  // namespace hamnet
