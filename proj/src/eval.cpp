#include "hamnet/eval.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <sstream>

#include "hamnet/audio_io.hpp"
#include "hamnet/clean.hpp"
#include "hamnet/error.hpp"
#include "hamnet/synth.hpp"

namespace hamnet {

using nlohmann::ordered_json;

// ---- signal metrics -------------------------------------------------------

SnrImprovement snr_improvement(const SampleBuffer& clean, const SampleBuffer& noisy,
                               const SampleBuffer& denoised) {
  require(clean.size() == noisy.size() && clean.size() == denoised.size(),
          "snr_improvement needs equal-length buffers");
  SnrImprovement r;
  r.input_db = estimate_snr(noisy, clean);
  r.output_db = estimate_snr(denoised, clean);
  r.delta_db = r.output_db - r.input_db;
  return r;
}

double spectrogram_mse(const Spectrogram& a, const Spectrogram& b) {
  if (a.bins() != b.bins() || a.frames() != b.frames() || a.fft_size != b.fft_size ||
      a.hop != b.hop) {
    fail(ErrorKind::Parameter, "spectrogram geometry mismatch: " + std::to_string(a.bins()) + "x" +
                                   std::to_string(a.frames()) + " vs " + std::to_string(b.bins()) +
                                   "x" + std::to_string(b.frames()));
  }
  require(!a.magnitudes.data.empty(), "spectrogram_mse of empty spectrograms");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.magnitudes.data.size(); ++i) {
    const double d = a.magnitudes.data[i] - b.magnitudes.data[i];
    acc += d * d;
  }
  return acc / static_cast<double>(a.magnitudes.data.size());
}

// ---- CW decoder -------------------------------------------------------------

namespace {

double goertzel_power(std::span<const double> x, double freq, int sample_rate) {
  const double w = 2.0 * std::numbers::pi * freq / sample_rate;
  const double coeff = 2.0 * std::cos(w);
  double s1 = 0.0, s2 = 0.0;
  for (double v : x) {
    const double s0 = v + coeff * s1 - s2;
    s2 = s1;
    s1 = s0;
  }
  return std::max(0.0, s1 * s1 + s2 * s2 - coeff * s1 * s2);
}

struct Run {
  bool on;
  std::size_t len;
};

char morse_lookup(const std::string& code) {
  static const std::map<std::string, char> table = [] {
    std::map<std::string, char> t;
    for (int c = 0; c < 128; ++c) {
      const auto m = morse_code_for(static_cast<char>(c));
      if (!m.empty()) t.emplace(std::string(m), static_cast<char>(c));
    }
    return t;
  }();
  const auto it = table.find(code);
  return it == table.end() ? '?' : it->second;
}

}  // namespace

CwDecodeResult decode_cw(const SampleBuffer& buf, double wpm, double tone_freq) {
  require(wpm > 0.0, "wpm must be positive");
  require(tone_freq > 0.0 && tone_freq < buf.sample_rate() / 2.0, "CW tone must lie below Nyquist");
  const auto win = static_cast<std::size_t>(std::llround(kCwWindowSeconds * buf.sample_rate()));
  require(win > 0, "sample rate too low for CW decoding");
  const std::size_t n_win = buf.size() / win;
  CwDecodeResult result;
  if (n_win < 2) return result;

  std::vector<double> energy(n_win);
  const auto x = buf.samples();
  for (std::size_t i = 0; i < n_win; ++i) {
    energy[i] = goertzel_power(x.subspan(i * win, win), tone_freq, buf.sample_rate());
  }
  const double p10 = quantile_linear(energy, 0.10);
  const double p90 = quantile_linear(energy, 0.90);
  if (!(p90 > 0.0) || p90 < kCwMinContrast * p10) return result;
  const double threshold = 0.5 * (p10 + p90);

  std::vector<Run> runs;
  for (double e : energy) {
    const bool on = e > threshold;
    if (!runs.empty() && runs.back().on == on) {
      ++runs.back().len;
    } else {
      runs.push_back({on, 1});
    }
  }

  const double unit_windows = (1.2 / wpm) / (static_cast<double>(win) / buf.sample_rate());
  // Interior glitches shorter than half a unit are absorbed into their neighbours.
  for (;;) {
    std::size_t shortest = 0;
    for (std::size_t i = 1; i + 1 < runs.size(); ++i) {
      if (shortest == 0 || runs[i].len < runs[shortest].len) shortest = i;
    }
    if (shortest == 0 || static_cast<double>(runs[shortest].len) >= 0.5 * unit_windows) break;
    runs[shortest - 1].len += runs[shortest].len + runs[shortest + 1].len;
    runs.erase(runs.begin() + static_cast<std::ptrdiff_t>(shortest),
               runs.begin() + static_cast<std::ptrdiff_t>(shortest) + 2);
  }
  while (!runs.empty() && !runs.front().on) runs.erase(runs.begin());
  while (!runs.empty() && !runs.back().on) runs.pop_back();
  if (runs.empty()) return result;
  result.keying_detected = true;

  std::string symbol;
  for (const auto& r : runs) {
    const double units = static_cast<double>(r.len) / unit_windows;
    if (r.on) {
      symbol += units < 2.0 ? '.' : '-';
    } else if (units >= 2.0) {
      result.text += morse_lookup(symbol);
      symbol.clear();
      if (units >= 5.0) result.text += ' ';
    }
  }
  if (!symbol.empty()) result.text += morse_lookup(symbol);
  return result;
}

// ---- PSK31 decoder -----------------------------------------------------------

std::vector<std::uint8_t> decode_psk31(const SampleBuffer& buf, double carrier_freq) {
  require(carrier_freq > 0.0 && carrier_freq < buf.sample_rate() / 2.0,
          "PSK31 carrier must lie below Nyquist");
  const std::size_t sps = psk31_samples_per_symbol(buf.sample_rate());
  const std::size_t n = buf.size();
  if (n < sps) {
    fail(ErrorKind::Parameter, "buffer shorter than one PSK31 symbol (" + std::to_string(n) + " < " +
                                   std::to_string(sps) + " samples)");
  }
  const auto x = buf.samples();
  const double w = 2.0 * std::numbers::pi * carrier_freq / buf.sample_rate();
  auto correlate = [&](std::size_t begin, std::size_t end) {
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t i = begin; i < end; ++i) {
      const double ph = w * static_cast<double>(i);
      acc += x[i] * std::complex<double>(std::cos(ph), -std::sin(ph));
    }
    return acc;
  };

  const std::size_t n_bits = n / sps;
  const std::size_t half = sps / 2;
  std::vector<std::uint8_t> bits(n_bits);
  std::complex<double> prev = correlate(0, half);
  for (std::size_t k = 0; k < n_bits; ++k) {
    const std::size_t begin = k * sps + half;
    const std::size_t end = std::min(begin + sps, n);
    const auto cur = correlate(begin, end);
    bits[k] = (cur * std::conj(prev)).real() < 0.0 ? 0 : 1;
    prev = cur;
  }
  return bits;
}

double ber(std::span<const std::uint8_t> tx, std::span<const std::uint8_t> rx) {
  require(!tx.empty(), "ber of an empty transmission");
  const std::size_t common = std::min(tx.size(), rx.size());
  std::size_t errors = tx.size() - common;
  for (std::size_t i = 0; i < common; ++i) errors += (tx[i] != 0) != (rx[i] != 0);
  return static_cast<double>(errors) / static_cast<double>(tx.size());
}

// ---- classification -------------------------------------------------------------

ClassificationMetrics classification_report(std::span<const std::string> predictions,
                                            std::span<const std::string> labels,
                                            std::span<const std::string> class_set) {
  require(predictions.size() == labels.size(), "predictions and labels differ in length");
  require(!labels.empty(), "classification_report of an empty set");
  require(!class_set.empty(), "empty class set");
  std::map<std::string, std::size_t> index;
  for (const auto& c : class_set) {
    if (!index.emplace(c, index.size()).second) fail(ErrorKind::Parameter, "duplicate class '" + c + "'");
  }
  auto lookup = [&](const std::string& name, const char* what) {
    const auto it = index.find(name);
    if (it == index.end()) fail(ErrorKind::Validation, std::string("unknown ") + what + " '" + name + "'");
    return it->second;
  };

  const std::size_t k = class_set.size();
  ClassificationMetrics m;
  m.classes.assign(class_set.begin(), class_set.end());
  m.confusion.assign(k, std::vector<std::size_t>(k, 0));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    ++m.confusion[lookup(labels[i], "label")][lookup(predictions[i], "prediction")];
  }

  auto ratio = [](double a, double b) { return b == 0.0 ? 0.0 : a / b; };
  std::size_t correct = 0;
  m.precision.resize(k);
  m.recall.resize(k);
  m.f1.resize(k);
  m.support.resize(k);
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t row = 0, col = 0;
    for (std::size_t j = 0; j < k; ++j) {
      row += m.confusion[c][j];
      col += m.confusion[j][c];
    }
    const auto tp = static_cast<double>(m.confusion[c][c]);
    correct += m.confusion[c][c];
    m.support[c] = row;
    m.precision[c] = ratio(tp, static_cast<double>(col));
    m.recall[c] = ratio(tp, static_cast<double>(row));
    m.f1[c] = ratio(2.0 * m.precision[c] * m.recall[c], m.precision[c] + m.recall[c]);
    m.macro_precision += m.precision[c];
    m.macro_recall += m.recall[c];
    m.macro_f1 += m.f1[c];
  }
  m.macro_precision /= static_cast<double>(k);
  m.macro_recall /= static_cast<double>(k);
  m.macro_f1 /= static_cast<double>(k);
  m.accuracy = static_cast<double>(correct) / static_cast<double>(labels.size());
  return m;
}

ordered_json ClassificationMetrics::to_json() const {
  ordered_json j;
  j["accuracy"] = accuracy;
  j["precision"] = macro_precision;
  j["recall"] = macro_recall;
  j["f1"] = macro_f1;
  j["confusion_matrix"] = confusion;
  j["classes"] = classes;
  j["per_class"] = ordered_json::array();
  for (std::size_t c = 0; c < classes.size(); ++c) {
    ordered_json row;
    row["class"] = classes[c];
    row["precision"] = precision[c];
    row["recall"] = recall[c];
    row["f1"] = f1[c];
    row["support"] = support[c];
    j["per_class"].push_back(std::move(row));
  }
  return j;
}

ClassificationMetrics ClassificationMetrics::from_json(const ordered_json& j) {
  try {
    ClassificationMetrics m;
    m.accuracy = j.at("accuracy").get<double>();
    m.macro_precision = j.at("precision").get<double>();
    m.macro_recall = j.at("recall").get<double>();
    m.macro_f1 = j.at("f1").get<double>();
    m.confusion = j.at("confusion_matrix").get<std::vector<std::vector<std::size_t>>>();
    m.classes = j.at("classes").get<std::vector<std::string>>();
    for (const auto& row : j.at("per_class")) {
      m.precision.push_back(row.at("precision").get<double>());
      m.recall.push_back(row.at("recall").get<double>());
      m.f1.push_back(row.at("f1").get<double>());
      m.support.push_back(row.at("support").get<std::size_t>());
    }
    if (m.precision.size() != m.classes.size() || m.confusion.size() != m.classes.size()) {
      fail(ErrorKind::Format, "classification metrics: inconsistent class count");
    }
    return m;
  } catch (const ordered_json::exception& e) {
    fail(ErrorKind::Format, std::string("malformed classification metrics: ") + e.what());
  }
}

// ---- reports --------------------------------------------------------------

namespace {

template <typename T>
ordered_json opt(const std::optional<T>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

template <typename T>
std::optional<T> get_opt(const ordered_json& j, const char* key) {
  const auto& v = j.at(key);
  if (v.is_null()) return std::nullopt;
  return v.get<T>();
}

std::optional<double> mean_of(const std::vector<RecordMetrics>& records,
                              std::optional<double> RecordMetrics::*field) {
  double acc = 0.0;
  std::size_t n = 0;
  for (const auto& r : records) {
    if (const auto& v = r.*field) {
      acc += *v;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return acc / static_cast<double>(n);
}

constexpr const char* kAggregateMetricNames[] = {
    "input_snr_db",         "output_snr_db", "snr_improvement_db", "spectrogram_mse_noisy",
    "spectrogram_mse_denoised", "mse_improved_fraction", "ber_before", "ber_after",
    "accuracy",             "precision",     "recall",             "f1"};

std::string fmt(const ordered_json& v) {
  if (v.is_null()) return "n/a";
  if (v.is_number_float()) {
    std::ostringstream os;
    os.precision(6);
    os << v.get<double>();
    return os.str();
  }
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

}  // namespace

void EvalReport::recompute_aggregate() {
  aggregate.records = records.size();
  aggregate.input_snr_db = mean_of(records, &RecordMetrics::input_snr_db);
  aggregate.output_snr_db = mean_of(records, &RecordMetrics::output_snr_db);
  aggregate.snr_improvement_db = mean_of(records, &RecordMetrics::snr_improvement_db);
  aggregate.spectrogram_mse_noisy = mean_of(records, &RecordMetrics::spectrogram_mse_noisy);
  aggregate.spectrogram_mse_denoised = mean_of(records, &RecordMetrics::spectrogram_mse_denoised);
  aggregate.ber_before = mean_of(records, &RecordMetrics::ber_before);
  aggregate.ber_after = mean_of(records, &RecordMetrics::ber_after);

  std::size_t paired = 0, improved = 0;
  for (const auto& r : records) {
    if (r.spectrogram_mse_noisy && r.spectrogram_mse_denoised) {
      ++paired;
      improved += *r.spectrogram_mse_denoised < *r.spectrogram_mse_noisy;
    }
  }
  aggregate.mse_improved_fraction =
      paired == 0 ? std::nullopt
                  : std::optional<double>(static_cast<double>(improved) / static_cast<double>(paired));
}

ordered_json EvalReport::to_json() const {
  ordered_json j;
  j["task"] = task;
  j["model_sha256"] = model_hash;
  j["manifest_sha256"] = manifest_hash;
  j["config"] = config;

  ordered_json agg;
  agg["records"] = aggregate.records;
  agg["input_snr_db"] = opt(aggregate.input_snr_db);
  agg["output_snr_db"] = opt(aggregate.output_snr_db);
  agg["snr_improvement_db"] = opt(aggregate.snr_improvement_db);
  agg["spectrogram_mse_noisy"] = opt(aggregate.spectrogram_mse_noisy);
  agg["spectrogram_mse_denoised"] = opt(aggregate.spectrogram_mse_denoised);
  agg["mse_improved_fraction"] = opt(aggregate.mse_improved_fraction);
  agg["ber_before"] = opt(aggregate.ber_before);
  agg["ber_after"] = opt(aggregate.ber_after);
  if (aggregate.classification) {
    const auto metrics = aggregate.classification->to_json();
    for (const auto& [key, value] : metrics.items()) agg[key] = value;
  } else {
    for (const char* key : {"accuracy", "precision", "recall", "f1", "confusion_matrix", "classes",
                            "per_class"}) {
      agg[key] = nullptr;
    }
  }
  j["aggregate"] = std::move(agg);

  j["records"] = ordered_json::array();
  for (const auto& r : records) {
    ordered_json row;
    row["id"] = r.id;
    row["class"] = r.signal_class;
    row["input_snr_db"] = opt(r.input_snr_db);
    row["output_snr_db"] = opt(r.output_snr_db);
    row["snr_improvement_db"] = opt(r.snr_improvement_db);
    row["spectrogram_mse_noisy"] = opt(r.spectrogram_mse_noisy);
    row["spectrogram_mse_denoised"] = opt(r.spectrogram_mse_denoised);
    row["ber_before"] = opt(r.ber_before);
    row["ber_after"] = opt(r.ber_after);
    row["true_label"] = opt(r.true_label);
    row["predicted_label"] = opt(r.predicted_label);
    row["score"] = opt(r.score);
    j["records"].push_back(std::move(row));
  }
  j["generated_at"] = generated_at;
  return j;
}

EvalReport EvalReport::from_json(const ordered_json& j) {
  try {
    EvalReport r;
    r.task = j.at("task").get<std::string>();
    r.model_hash = j.at("model_sha256").get<std::string>();
    r.manifest_hash = j.at("manifest_sha256").get<std::string>();
    r.config = j.at("config");
    r.generated_at = j.at("generated_at").get<std::string>();
    const auto& agg = j.at("aggregate");
    r.aggregate.records = agg.at("records").get<std::size_t>();
    r.aggregate.input_snr_db = get_opt<double>(agg, "input_snr_db");
    r.aggregate.output_snr_db = get_opt<double>(agg, "output_snr_db");
    r.aggregate.snr_improvement_db = get_opt<double>(agg, "snr_improvement_db");
    r.aggregate.spectrogram_mse_noisy = get_opt<double>(agg, "spectrogram_mse_noisy");
    r.aggregate.spectrogram_mse_denoised = get_opt<double>(agg, "spectrogram_mse_denoised");
    r.aggregate.mse_improved_fraction = get_opt<double>(agg, "mse_improved_fraction");
    r.aggregate.ber_before = get_opt<double>(agg, "ber_before");
    r.aggregate.ber_after = get_opt<double>(agg, "ber_after");
    if (!agg.at("accuracy").is_null()) r.aggregate.classification = ClassificationMetrics::from_json(agg);
    for (const auto& row : j.at("records")) {
      RecordMetrics m;
      m.id = row.at("id").get<std::string>();
      m.signal_class = row.at("class").get<std::string>();
      m.input_snr_db = get_opt<double>(row, "input_snr_db");
      m.output_snr_db = get_opt<double>(row, "output_snr_db");
      m.snr_improvement_db = get_opt<double>(row, "snr_improvement_db");
      m.spectrogram_mse_noisy = get_opt<double>(row, "spectrogram_mse_noisy");
      m.spectrogram_mse_denoised = get_opt<double>(row, "spectrogram_mse_denoised");
      m.ber_before = get_opt<double>(row, "ber_before");
      m.ber_after = get_opt<double>(row, "ber_after");
      m.true_label = get_opt<std::string>(row, "true_label");
      m.predicted_label = get_opt<std::string>(row, "predicted_label");
      m.score = get_opt<double>(row, "score");
      r.records.push_back(std::move(m));
    }
    return r;
  } catch (const ordered_json::exception& e) {
    fail(ErrorKind::Format, std::string("malformed evaluation report: ") + e.what());
  }
}

std::string EvalReport::to_markdown() const {
  const auto j = to_json();
  const auto& agg = j["aggregate"];
  std::ostringstream os;
  os << "# Evaluation report\n\n";
  os << "- task: " << task << "\n";
  os << "- model_sha256: `" << model_hash << "`\n";
  os << "- manifest_sha256: `" << manifest_hash << "`\n";
  os << "- records: " << aggregate.records << "\n";
  os << "- generated_at: " << generated_at << "\n\n";
  os << "## Aggregate\n\n| metric | value |\n|---|---|\n";
  for (const char* key : kAggregateMetricNames) os << "| " << key << " | " << fmt(agg[key]) << " |\n";

  os << "\n## confusion_matrix\n\n";
  if (aggregate.classification) {
    const auto& cm = *aggregate.classification;
    os << "| true \\ predicted |";
    for (const auto& c : cm.classes) os << " " << c << " |";
    os << "\n|---|";
    for (std::size_t i = 0; i < cm.classes.size(); ++i) os << "---|";
    os << "\n";
    for (std::size_t r = 0; r < cm.classes.size(); ++r) {
      os << "| " << cm.classes[r] << " |";
      for (auto v : cm.confusion[r]) os << " " << v << " |";
      os << "\n";
    }
    os << "\n| class | precision | recall | f1 | support |\n|---|---|---|---|---|\n";
    for (std::size_t c = 0; c < cm.classes.size(); ++c) {
      os << "| " << cm.classes[c] << " | " << fmt(cm.precision[c]) << " | " << fmt(cm.recall[c])
         << " | " << fmt(cm.f1[c]) << " | " << cm.support[c] << " |\n";
    }
  } else {
    os << "n/a\n";
  }

  os << "\n## Records\n\n| id | class | input_snr_db | output_snr_db | snr_improvement_db | "
        "spectrogram_mse_noisy | spectrogram_mse_denoised | ber_before | ber_after | true_label | "
        "predicted_label | score |\n|---|---|---|---|---|---|---|---|---|---|---|---|\n";
  for (const auto& row : j["records"]) {
    os << "|";
    for (const auto& [key, value] : row.items()) os << " " << fmt(value) << " |";
    os << "\n";
  }
  return os.str();
}

ReportFormat parse_report_format(std::string_view name) {
  if (name == "json") return ReportFormat::Json;
  if (name == "markdown" || name == "md") return ReportFormat::Markdown;
  fail(ErrorKind::Config, "unknown report format '" + std::string(name) + "' (expected json|markdown)");
}

void emit_report(const EvalReport& report, const std::filesystem::path& path, ReportFormat format) {
  write_text_file(path, format == ReportFormat::Json ? report.to_json().dump(2) + "\n"
                                                     : report.to_markdown());
}

}  // namespace hamnet
