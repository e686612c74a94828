#include "hamnet.h"

#include <cmath>
#include <cstring>
#include <new>
#include <string>

#include "hamnet/audio_io.hpp"
#include "hamnet/error.hpp"
#include "hamnet/nn/serialize.hpp"
#include "hamnet/pipeline.hpp"
#include "hamnet/synth.hpp"

struct hamnet_buffer {
  hamnet::SampleBuffer buf;
};

struct hamnet_model {
  hamnet::nn::Model model;
  std::vector<std::string> labels;  // empty for denoisers
};

namespace {

thread_local std::string g_last_error;

hamnet_status status_for(hamnet::ErrorKind kind) {
  using K = hamnet::ErrorKind;
  switch (kind) {
    case K::Parameter: return HAMNET_E_PARAMETER;
    case K::Config: return HAMNET_E_CONFIG;
    case K::Validation: return HAMNET_E_VALIDATION;
    case K::Io: return HAMNET_E_IO;
    case K::FormatMagic: return HAMNET_E_FORMAT_MAGIC;
    case K::FormatVersion: return HAMNET_E_FORMAT_VERSION;
    case K::FormatTruncated: return HAMNET_E_FORMAT_TRUNCATED;
    case K::Format: return HAMNET_E_FORMAT;
    case K::Unsupported: return HAMNET_E_UNSUPPORTED;
    case K::Training: return HAMNET_E_TRAINING;
    case K::Internal: return HAMNET_E_INTERNAL;
  }
  return HAMNET_E_INTERNAL;
}

/// Runs f, translating every exception into a status; no exception crosses the boundary.
template <typename F>
hamnet_status guarded(F&& f) noexcept {
  try {
    f();
    g_last_error.clear();
    return HAMNET_OK;
  } catch (const hamnet::Error& e) {
    g_last_error = e.what();
    return status_for(e.kind());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
  } catch (const std::exception& e) {
    g_last_error = e.what();
  } catch (...) {
    g_last_error = "unknown exception";
  }
  return HAMNET_E_INTERNAL;
}

void non_null(const void* p, const char* name) {
  if (!p) hamnet::fail(hamnet::ErrorKind::Parameter, std::string(name) + " must not be null");
}

char* dup_string(const std::string& s) {
  auto* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* hamnet_version(void) { return "1.0.0"; }

const char* hamnet_status_name(hamnet_status status) {
  switch (status) {
    case HAMNET_OK: return "ok";
    case HAMNET_E_PARAMETER: return "parameter";
    case HAMNET_E_CONFIG: return "config";
    case HAMNET_E_VALIDATION: return "validation";
    case HAMNET_E_IO: return "io";
    case HAMNET_E_FORMAT_MAGIC: return "format_magic";
    case HAMNET_E_FORMAT_VERSION: return "format_version";
    case HAMNET_E_FORMAT_TRUNCATED: return "format_truncated";
    case HAMNET_E_FORMAT: return "format";
    case HAMNET_E_UNSUPPORTED: return "unsupported";
    case HAMNET_E_TRAINING: return "training";
    case HAMNET_E_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* hamnet_last_error(void) { return g_last_error.c_str(); }

void hamnet_string_free(char* s) { std::free(s); }

hamnet_status hamnet_run_command(const char* command, const char* config_json, char** result_json) {
  if (result_json) *result_json = nullptr;
  return guarded([&] {
    non_null(command, "command");
    non_null(config_json, "config_json");
    nlohmann::ordered_json config;
    try {
      config = nlohmann::ordered_json::parse(config_json);
    } catch (const nlohmann::json::parse_error& e) {
      hamnet::fail(hamnet::ErrorKind::Config, std::string("config is not valid JSON: ") + e.what());
    }
    const auto result = hamnet::run_command(command, config);
    if (result_json) *result_json = dup_string(result.dump());
  });
}

hamnet_status hamnet_buffer_create(const double* samples, size_t n, int sample_rate, hamnet_buffer** out) {
  return guarded([&] {
    non_null(out, "out");
    *out = nullptr;
    if (n > 0) non_null(samples, "samples");
    std::vector<double> v(samples, samples + n);
    *out = new hamnet_buffer{hamnet::SampleBuffer(std::move(v), sample_rate)};
  });
}

hamnet_status hamnet_buffer_read(const char* path, int raw_sample_rate, hamnet_buffer** out) {
  return guarded([&] {
    non_null(out, "out");
    *out = nullptr;
    non_null(path, "path");
    *out = new hamnet_buffer{hamnet::read_signal_file(path, raw_sample_rate)};
  });
}

hamnet_status hamnet_buffer_write_wav(const hamnet_buffer* buf, const char* path) {
  return guarded([&] {
    non_null(buf, "buf");
    non_null(path, "path");
    hamnet::wav_write(buf->buf, path);
  });
}

hamnet_status hamnet_synth_signal(const char* signal_class, double duration_s, int sample_rate, uint64_t seed,
                                  int noisy, double snr_db, hamnet_buffer** out) {
  return guarded([&] {
    non_null(out, "out");
    *out = nullptr;
    non_null(signal_class, "signal_class");
    hamnet::SnrSetting snr;
    if (noisy) {
      if (!std::isfinite(snr_db)) hamnet::fail(hamnet::ErrorKind::Parameter, "snr_db must be finite");
      snr = snr_db;
    }
    const auto spec =
        hamnet::make_signal_spec(hamnet::parse_signal_class(signal_class), duration_s, sample_rate, snr, seed);
    *out = new hamnet_buffer{hamnet::render(spec)};
  });
}

size_t hamnet_buffer_size(const hamnet_buffer* buf) { return buf ? buf->buf.size() : 0; }

int hamnet_buffer_sample_rate(const hamnet_buffer* buf) { return buf ? buf->buf.sample_rate() : 0; }

const double* hamnet_buffer_data(const hamnet_buffer* buf) { return buf ? buf->buf.samples().data() : nullptr; }

void hamnet_buffer_free(hamnet_buffer* buf) { delete buf; }

hamnet_status hamnet_model_load(const char* path, hamnet_model** out) {
  return guarded([&] {
    non_null(out, "out");
    *out = nullptr;
    non_null(path, "path");
    auto model = hamnet::nn::load_model(path);
    std::vector<std::string> labels;
    if (hamnet::infer_task(model) == hamnet::Task::Classify) labels = hamnet::output_labels(model);
    *out = new hamnet_model{std::move(model), std::move(labels)};
  });
}

hamnet_status hamnet_model_save(const hamnet_model* model, const char* path) {
  return guarded([&] {
    non_null(model, "model");
    non_null(path, "path");
    hamnet::nn::save_model(model->model, path);
  });
}

const char* hamnet_model_task(const hamnet_model* model) {
  if (!model) return "";
  return hamnet::infer_task(model->model) == hamnet::Task::Classify ? "classify" : "denoise";
}

hamnet_status hamnet_model_classify(const hamnet_model* model, const hamnet_buffer* input, const char** label,
                                    double* score) {
  return guarded([&] {
    non_null(model, "model");
    non_null(input, "input");
    non_null(label, "label");
    const auto c = hamnet::classify_signal(model->model, input->buf);
    for (const auto& l : model->labels) {
      if (l == c.label) *label = l.c_str();
    }
    if (score) *score = c.score;
  });
}

hamnet_status hamnet_model_denoise(const hamnet_model* model, const hamnet_buffer* input, hamnet_buffer** out) {
  return guarded([&] {
    non_null(out, "out");
    *out = nullptr;
    non_null(model, "model");
    non_null(input, "input");
    *out = new hamnet_buffer{hamnet::denoise_signal(model->model, input->buf).signal};
  });
}

void hamnet_model_free(hamnet_model* model) { delete model; }

}  // extern "C"
