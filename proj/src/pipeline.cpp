#include "hamnet/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <iostream>
#include <map>
#include <sstream>

#include "hamnet/audio_io.hpp"
#include "hamnet/augment.hpp"
#include "hamnet/clean.hpp"
#include "hamnet/error.hpp"
#include "hamnet/eval.hpp"
#include "hamnet/features.hpp"
#include "hamnet/hash.hpp"
#include "hamnet/nn/kfold.hpp"
#include "hamnet/nn/serialize.hpp"
#include "hamnet/nn/train.hpp"
#include "hamnet/rng.hpp"

namespace hamnet {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

constexpr std::string_view kAugmentMarker = "+aug.";
constexpr SignalClass kAllClasses[] = {SignalClass::CW,   SignalClass::AM,   SignalClass::FM,
                                       SignalClass::PSK31, SignalClass::FSK8, SignalClass::NOISE};

// ---- config access ------------------------------------------------------------

/// Typed, consumption-tracked view of a command config. Every read records
/// the effective value in `resolved`; finish() rejects keys nobody read.
class ConfigReader {
 public:
  ConfigReader(const ordered_json& config, std::string_view command) : config_(config), command_(command) {
    if (!config.is_object()) fail(ErrorKind::Config, command_ + ": config must be a JSON object");
    resolved["command"] = command_;
  }

  std::string string(const char* key, std::optional<std::string> fallback = std::nullopt) {
    const auto* v = lookup(key);
    if (!v) return store(key, need(key, fallback));
    if (!v->is_string()) bad_type(key, "a string");
    return store(key, v->get<std::string>());
  }

  std::optional<std::string> optional_string(const char* key) {
    const auto* v = lookup(key);
    if (!v) {
      resolved[key] = nullptr;
      return std::nullopt;
    }
    if (!v->is_string()) bad_type(key, "a string");
    return store(key, v->get<std::string>());
  }

  double number(const char* key, std::optional<double> fallback = std::nullopt) {
    const auto* v = lookup(key);
    if (!v) return store(key, need(key, fallback));
    if (!v->is_number()) bad_type(key, "a number");
    const double d = v->get<double>();
    if (!std::isfinite(d)) bad_type(key, "a finite number");
    return store(key, d);
  }

  std::uint64_t unsigned_integer(const char* key, std::optional<std::uint64_t> fallback = std::nullopt) {
    const auto* v = lookup(key);
    if (!v) return store(key, need(key, fallback));
    if (!v->is_number_integer() || (!v->is_number_unsigned() && v->get<std::int64_t>() < 0)) {
      bad_type(key, "a nonnegative integer");
    }
    return store(key, v->get<std::uint64_t>());
  }

  bool boolean(const char* key, bool fallback) {
    const auto* v = lookup(key);
    if (!v) return store(key, fallback);
    if (!v->is_boolean()) bad_type(key, "true or false");
    return store(key, v->get<bool>());
  }

  std::vector<std::string> strings(const char* key, std::vector<std::string> fallback) {
    const auto* v = lookup(key);
    if (!v) return store(key, std::move(fallback));
    if (!v->is_array()) bad_type(key, "an array of strings");
    std::vector<std::string> out;
    for (const auto& e : *v) {
      if (!e.is_string()) bad_type(key, "an array of strings");
      out.push_back(e.get<std::string>());
    }
    return store(key, std::move(out));
  }

  /// Raw JSON value (validated by the caller).
  const ordered_json* raw(const char* key) { return lookup(key); }

  void record(const char* key, ordered_json value) { resolved[key] = std::move(value); }

  void finish() const {
    for (const auto& [key, value] : config_.items()) {
      if (!used_.contains(key)) fail(ErrorKind::Config, command_ + ": unknown config key '" + key + "'");
    }
  }

  ordered_json resolved;

 private:
  const ordered_json* lookup(const char* key) {
    used_.insert(key);
    const auto it = config_.find(key);
    if (it == config_.end() || it->is_null()) return nullptr;
    return &*it;
  }

  template <typename T>
  T need(const char* key, const std::optional<T>& fallback) const {
    if (!fallback) fail(ErrorKind::Config, command_ + ": missing required config key '" + std::string(key) + "'");
    return *fallback;
  }

  template <typename T>
  T store(const char* key, T value) {
    resolved[key] = value;
    return value;
  }

  [[noreturn]] void bad_type(const char* key, const char* expected) const {
    fail(ErrorKind::Config, command_ + ": config key '" + std::string(key) + "' must be " + expected);
  }

  const ordered_json& config_;
  std::string command_;
  std::set<std::string> used_;
};

/// Keys every command accepts. Only some commands act on each.
struct CommonKeys {
  std::uint64_t seed = 0;
  std::string format = "json";
  bool verbose = false;
};

CommonKeys read_common(ConfigReader& r) {
  CommonKeys c;
  c.seed = r.unsigned_integer("seed", 0);
  c.format = r.string("format", std::string("json"));
  parse_report_format(c.format);
  c.verbose = r.boolean("verbose", false);
  return c;
}

fs::path prepare_out_dir(const std::string& out) {
  const fs::path dir(out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) fail(ErrorKind::Io, "cannot create output directory '" + out + "'");
  return dir;
}

void write_json(const fs::path& path, const ordered_json& j) { write_text_file(path, j.dump(2) + "\n"); }

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Path of `target` relative to directory `base`, both made absolute first.
std::string relative_to(const fs::path& target, const fs::path& base) {
  const auto rel = fs::absolute(target).lexically_normal().lexically_relative(fs::absolute(base).lexically_normal());
  return rel.generic_string();
}

SampleBuffer load_record(const DatasetRecord& r, const fs::path& root) {
  auto buf = read_raw_f32(root / r.path, r.sample_rate);
  if (buf.size() != r.expected_samples()) {
    fail(ErrorKind::Validation, "record " + r.id + ": signal has " + std::to_string(buf.size()) + " samples, expected " +
                                    std::to_string(r.expected_samples()));
  }
  return buf;
}

// ---- labels and splits --------------------------------------------------------------

enum class LabelMode { Binary, Class };

LabelMode parse_label_mode(const std::string& s) {
  if (s == "binary") return LabelMode::Binary;
  if (s == "class") return LabelMode::Class;
  fail(ErrorKind::Config, "labels must be 'binary' or 'class', got '" + s + "'");
}

std::vector<std::string> label_names(LabelMode mode) {
  if (mode == LabelMode::Binary) return {"clean", "noisy"};
  std::vector<std::string> names;
  for (auto c : kAllClasses) names.emplace_back(to_string(c));
  return names;
}

std::optional<int> label_index(const DatasetRecord& r, LabelMode mode) {
  if (mode == LabelMode::Class) return static_cast<int>(r.signal_class);
  if (!r.binary_label) return std::nullopt;
  return *r.binary_label == BinaryLabel::Noisy ? 1 : 0;
}

struct Labelled {
  std::vector<DatasetRecord> records;
  std::vector<int> labels;
};

Labelled classification_records(const std::vector<DatasetRecord>& all, LabelMode mode) {
  Labelled out;
  for (const auto& r : all) {
    if (const auto l = label_index(r, mode)) {
      out.records.push_back(r);
      out.labels.push_back(*l);
    }
  }
  return out;
}

std::vector<DatasetRecord> denoise_records(const std::vector<DatasetRecord>& all,
                                           const std::set<SignalClass>& classes) {
  std::vector<DatasetRecord> out;
  for (const auto& r : all) {
    if (r.snr_db && classes.contains(r.signal_class) && is_regenerable(r)) out.push_back(r);
  }
  return out;
}

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
};

/// Per-label seeded shuffle; round(fraction * n) of each label goes to
/// validation, at least one when the label has two or more members.
Split stratified_split(const std::vector<int>& labels, double val_fraction, std::uint64_t seed) {
  std::map<int, std::vector<std::size_t>> by_label;
  for (std::size_t i = 0; i < labels.size(); ++i) by_label[labels[i]].push_back(i);
  Rng rng(seed);
  Split s;
  for (auto& [label, members] : by_label) {
    for (std::size_t i = members.size(); i > 1; --i) std::swap(members[i - 1], members[rng.below(i)]);
    const std::size_t n = members.size();
    auto n_val = static_cast<std::size_t>(std::llround(val_fraction * static_cast<double>(n)));
    if (n >= 2) n_val = std::clamp<std::size_t>(n_val, 1, n - 1);
    else n_val = 0;
    s.val.insert(s.val.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n_val));
    s.train.insert(s.train.end(), members.begin() + static_cast<std::ptrdiff_t>(n_val), members.end());
  }
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.val.begin(), s.val.end());
  return s;
}

// ---- training helpers ----------------------------------------------------------------

struct TrainKeys {
  nn::TrainConfig train;
  double val_fraction = 0.2;
};

TrainKeys read_train_keys(ConfigReader& r, std::uint64_t seed) {
  TrainKeys k;
  k.train.max_epochs = r.unsigned_integer("epochs", 10);
  k.train.batch_size = r.unsigned_integer("batch_size", 32);
  k.train.learning_rate = r.number("learning_rate", 0.001);
  k.train.patience = r.unsigned_integer("patience", 3);
  k.val_fraction = r.number("val_fraction", 0.2);
  if (k.train.max_epochs == 0) fail(ErrorKind::Config, "epochs must be at least 1");
  if (k.train.batch_size == 0) fail(ErrorKind::Config, "batch_size must be at least 1");
  if (!(k.train.learning_rate > 0.0)) fail(ErrorKind::Config, "learning_rate must be positive");
  if (!(k.val_fraction > 0.0 && k.val_fraction < 1.0)) fail(ErrorKind::Config, "val_fraction must lie in (0, 1)");
  k.train.seed = derive_seed(seed, 202);
  return k;
}

nn::EpochCallback progress(bool verbose, std::size_t max_epochs, std::string prefix) {
  if (!verbose) return {};
  return [max_epochs, prefix = std::move(prefix)](const nn::EpochRecord& e) {
    std::clog << prefix << "epoch " << e.epoch << "/" << max_epochs << " train_loss=" << e.train_loss
              << " val_loss=" << e.val_loss;
    if (e.val_accuracy) std::clog << " val_accuracy=" << *e.val_accuracy;
    std::clog << std::endl;
  };
}

nn::Tensor one_hot_target(int label, LabelMode mode) {
  if (mode == LabelMode::Binary) return nn::Tensor({1}, static_cast<double>(label));
  nn::Tensor t({std::size(kAllClasses)});
  t[static_cast<std::size_t>(label)] = 1.0;
  return t;
}

std::vector<nn::Example> classification_examples(const std::vector<DatasetRecord>& records,
                                                 const std::vector<int>& labels,
                                                 const std::vector<std::size_t>& which, const fs::path& root,
                                                 LabelMode mode) {
  std::vector<nn::Example> out;
  out.reserve(which.size());
  for (auto i : which) out.push_back({classifier_input(load_record(records[i], root)), one_hot_target(labels[i], mode)});
  return out;
}

struct TrainedModel {
  nn::Model model;
  nn::TrainHistory history;
};

TrainedModel train_classifier(const Labelled& data, const Split& split, const fs::path& root, LabelMode mode,
                              const TrainKeys& keys, std::uint64_t seed, bool verbose, const std::string& prefix) {
  if (data.records.empty()) {
    fail(ErrorKind::Validation, "empty dataset: no records are eligible for classifier training");
  }
  const auto train_set = classification_examples(data.records, data.labels, split.train, root, mode);
  const auto val_set = classification_examples(data.records, data.labels, split.val, root, mode);
  const auto& shape = train_set.empty() ? nn::Shape{} : train_set.front().input.shape();
  for (const auto* set : {&train_set, &val_set}) {
    for (const auto& e : *set) {
      if (e.input.shape() != shape) fail(ErrorKind::Validation, "records have differing lengths; classifier inputs must agree");
    }
  }
  if (train_set.empty()) fail(ErrorKind::Validation, "empty dataset: the training split has no examples");
  auto model = nn::build_classifier(shape, mode == LabelMode::Binary ? 1 : std::size(kAllClasses));
  model.initialize(derive_seed(seed, 201));
  auto cfg = keys.train;
  cfg.loss = nn::LossKind::Bce;
  auto history = nn::train(model, train_set, val_set, cfg, progress(verbose, cfg.max_epochs, prefix));
  return {std::move(model), std::move(history)};
}

ordered_json ids_json(const std::vector<DatasetRecord>& records, const std::vector<std::size_t>& which) {
  ordered_json a = ordered_json::array();
  for (auto i : which) a.push_back(records[i].id);
  return a;
}

ordered_json history_summary(const nn::TrainHistory& h) {
  ordered_json s;
  s["epochs_run"] = h.epochs.size();
  s["best_epoch"] = h.best_epoch;
  s["stopped_early"] = h.stopped_early;
  const auto& best = h.epochs.at(h.best_epoch - 1);
  s["best_val_loss"] = best.val_loss;
  s["best_val_accuracy"] = best.val_accuracy ? ordered_json(*best.val_accuracy) : ordered_json(nullptr);
  return s;
}

// ---- evaluation helpers ----------------------------------------------------------------

EvalReport evaluate_classifier(const nn::Model& model, const std::vector<DatasetRecord>& records,
                               const fs::path& root) {
  const auto names = output_labels(model);
  const LabelMode mode = names.size() == 2 ? LabelMode::Binary : LabelMode::Class;
  EvalReport report;
  report.task = std::string(to_string(Task::Classify));
  std::vector<std::string> truth, predicted;
  for (const auto& r : records) {
    const auto l = label_index(r, mode);
    if (!l) continue;
    const auto c = classify_signal(model, load_record(r, root));
    RecordMetrics m;
    m.id = r.id;
    m.signal_class = std::string(to_string(r.signal_class));
    m.true_label = names[static_cast<std::size_t>(*l)];
    m.predicted_label = c.label;
    m.score = c.score;
    if (r.snr_db) m.input_snr_db = *r.snr_db;
    truth.push_back(*m.true_label);
    predicted.push_back(c.label);
    report.records.push_back(std::move(m));
  }
  if (report.records.empty()) fail(ErrorKind::Validation, "empty dataset: no records carry a label the model predicts");
  report.recompute_aggregate();
  report.aggregate.classification = classification_report(predicted, truth, names);
  return report;
}

std::vector<std::uint8_t> transmitted_bits(const SignalSpec& spec, std::size_t n_samples) {
  const std::size_t n_bits = std::min(spec.params.bits.size(), n_samples / psk31_samples_per_symbol(spec.sample_rate));
  return {spec.params.bits.begin(), spec.params.bits.begin() + static_cast<std::ptrdiff_t>(n_bits)};
}

EvalReport evaluate_denoiser(const nn::Model& model, const std::vector<DatasetRecord>& records, const fs::path& root) {
  EvalReport report;
  report.task = std::string(to_string(Task::Denoise));
  for (const auto& r : records) {
    if (!is_regenerable(r)) {
      fail(ErrorKind::Validation, "record " + r.id + " is augmented; denoising metrics need a regenerable clean reference");
    }
    const auto noisy = load_record(r, root);
    const auto spec = signal_spec_for(r);
    const auto clean = render_clean(spec);
    const auto denoised = denoise_signal(model, noisy).signal;
    const auto snr = snr_improvement(clean, noisy, denoised);
    const auto s_clean = stft(clean), s_noisy = stft(noisy), s_denoised = stft(denoised);
    RecordMetrics m;
    m.id = r.id;
    m.signal_class = std::string(to_string(r.signal_class));
    m.input_snr_db = snr.input_db;
    m.output_snr_db = snr.output_db;
    m.snr_improvement_db = snr.delta_db;
    m.spectrogram_mse_noisy = spectrogram_mse(s_noisy, s_clean);
    m.spectrogram_mse_denoised = spectrogram_mse(s_denoised, s_clean);
    if (r.signal_class == SignalClass::PSK31) {
      const auto tx = transmitted_bits(spec, noisy.size());
      if (!tx.empty()) {
        m.ber_before = ber(tx, decode_psk31(noisy, spec.params.tone_hz));
        m.ber_after = ber(tx, decode_psk31(denoised, spec.params.tone_hz));
      }
    }
    report.records.push_back(std::move(m));
  }
  if (report.records.empty()) fail(ErrorKind::Validation, "empty dataset: no records to evaluate");
  report.recompute_aggregate();
  return report;
}

void emit_all(const EvalReport& report, const fs::path& dir, const std::string& format) {
  emit_report(report, dir / "report.json", ReportFormat::Json);
  if (parse_report_format(format) == ReportFormat::Markdown) emit_report(report, dir / "report.md", ReportFormat::Markdown);
}

std::set<SignalClass> parse_classes(const std::vector<std::string>& names) {
  std::set<SignalClass> out;
  for (const auto& n : names) {
    try {
      out.insert(parse_signal_class(n));
    } catch (const Error& e) {
      fail(ErrorKind::Config, e.what());
    }
  }
  return out;
}

std::vector<std::string> class_names(std::initializer_list<SignalClass> classes) {
  std::vector<std::string> out;
  for (auto c : classes) out.emplace_back(to_string(c));
  return out;
}

}  // namespace

// ---- conventions ----------------------------------------------------------------

std::string_view to_string(Task task) noexcept { return task == Task::Classify ? "classify" : "denoise"; }

Task parse_task(std::string_view name) {
  if (name == "classify") return Task::Classify;
  if (name == "denoise") return Task::Denoise;
  fail(ErrorKind::Config, "task must be 'classify' or 'denoise', got '" + std::string(name) + "'");
}

Task infer_task(const nn::Model& model) {
  return model.output_shape() == model.input_shape() ? Task::Denoise : Task::Classify;
}

std::vector<std::string> output_labels(const nn::Model& model) {
  const auto& out = model.output_shape();
  if (out.size() == 1 && out[0] == 1) return label_names(LabelMode::Binary);
  if (out.size() == 1 && out[0] == std::size(kAllClasses)) return label_names(LabelMode::Class);
  fail(ErrorKind::Validation, "model output " + nn::shape_string(out) + " is neither a binary nor a signal-class head");
}

nn::Tensor classifier_input(const SampleBuffer& buf) {
  const auto spec = stft(buf);
  auto m = log_compress_normalize(spec.magnitudes);
  return nn::Tensor({m.rows, m.cols, 1}, std::move(m.data));
}

nn::Tensor denoiser_input(const Spectrogram& padded_noisy) {
  auto m = log_compress_normalize(padded_noisy.magnitudes);
  return nn::Tensor({m.rows, m.cols, 1}, std::move(m.data));
}

nn::Tensor ratio_mask_target(const Spectrogram& padded_noisy, const Spectrogram& padded_clean) {
  const auto& n = padded_noisy.magnitudes;
  const auto& c = padded_clean.magnitudes;
  require(n.rows == c.rows && n.cols == c.cols, "noisy and clean spectrograms differ in geometry");
  nn::Tensor t({n.rows, n.cols, 1});
  for (std::size_t i = 0; i < n.data.size(); ++i) t[i] = std::min(1.0, c.data[i] / std::max(n.data[i], 1e-12));
  return t;
}

nn::Model with_input_shape(const nn::Model& model, const nn::Shape& input_shape) {
  if (input_shape == model.input_shape()) return model;
  nn::Model out(input_shape, model.layers());
  for (std::size_t l = 0; l < out.params().size(); ++l) {
    for (std::size_t s = 0; s < out.params()[l].size(); ++s) {
      if (out.params()[l][s].shape() != model.params()[l][s].shape()) {
        fail(ErrorKind::Validation, "model parameters depend on the input size; expected input " +
                                        nn::shape_string(model.input_shape()));
      }
      out.params()[l][s] = model.params()[l][s];
    }
  }
  return out;
}

Denoised denoise_signal(const nn::Model& denoiser, const SampleBuffer& noisy) {
  if (infer_task(denoiser) != Task::Denoise) fail(ErrorKind::Validation, "model is not a denoiser");
  const auto padded = pad_for_reconstruction(noisy);
  auto spec = stft(padded);
  const auto input = denoiser_input(spec);
  const auto mask = with_input_shape(denoiser, input.shape()).predict(input);
  double total = 0.0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    spec.magnitudes.data[i] *= mask[i];
    total += mask[i];
  }
  auto out = strip_reconstruction_padding(istft(spec), noisy.size());
  return {std::move(out), total / static_cast<double>(mask.size())};
}

Classification classify_signal(const nn::Model& classifier, const SampleBuffer& buf) {
  if (infer_task(classifier) != Task::Classify) fail(ErrorKind::Validation, "model is not a classifier");
  const auto names = output_labels(classifier);
  if (buf.size() < kFftSize) fail(ErrorKind::Validation, "input shorter than one analysis frame");
  const auto input = classifier_input(buf);
  if (input.shape() != classifier.input_shape()) {
    fail(ErrorKind::Validation, "input spectrogram " + nn::shape_string(input.shape()) + " does not match model input " +
                                    nn::shape_string(classifier.input_shape()) + "; supply a segment of the trained length");
  }
  const auto out = classifier.predict(input);
  if (names.size() == 2) {
    const double p = out[0];
    return p >= 0.5 ? Classification{names[1], p} : Classification{names[0], 1.0 - p};
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (out[i] > out[best]) best = i;
  }
  return {names[best], out[best]};
}

bool is_regenerable(const DatasetRecord& record) {
  return record.id.find(kAugmentMarker) == std::string::npos;
}

// ---- commands ---------------------------------------------------------------------

ordered_json cmd_synth(const ordered_json& config) {
  ConfigReader r(config, "synth");
  const auto common = read_common(r);
  DatasetConfig dc;
  dc.seed = common.seed;
  for (const auto& c : parse_classes(r.strings("classes", class_names({SignalClass::CW, SignalClass::AM, SignalClass::FM,
                                                                        SignalClass::PSK31, SignalClass::FSK8,
                                                                        SignalClass::NOISE})))) {
    dc.classes.push_back(c);
  }
  dc.count_per_cell = r.unsigned_integer("count_per_cell", 1);
  dc.duration_s = r.number("duration_s", 1.0);
  dc.sample_rate = static_cast<int>(r.unsigned_integer("sample_rate", kDefaultSampleRate));
  dc.snr_grid.clear();
  if (const auto* grid = r.raw("snr_grid")) {
    if (!grid->is_array()) fail(ErrorKind::Config, "synth: snr_grid must be an array of numbers or \"clean\"");
    for (const auto& g : *grid) {
      if (g.is_string() && g.get<std::string>() == "clean") dc.snr_grid.emplace_back(std::nullopt);
      else if (g.is_number()) dc.snr_grid.emplace_back(g.get<double>());
      else fail(ErrorKind::Config, "synth: snr_grid entries must be numbers or \"clean\"");
    }
    r.record("snr_grid", *grid);
  } else {
    dc.snr_grid.emplace_back(std::nullopt);
    r.record("snr_grid", ordered_json::array({"clean"}));
  }
  if (!(dc.duration_s > 0.0)) fail(ErrorKind::Config, "synth: duration_s must be positive");
  if (dc.sample_rate <= 0) fail(ErrorKind::Config, "synth: sample_rate must be positive");
  const auto out = prepare_out_dir(r.string("out"));
  r.finish();

  const auto records = synth_dataset(dc, out);
  write_json(out / "resolved_config.json", r.resolved);
  ordered_json s;
  s["command"] = "synth";
  s["manifest"] = (out / "manifest.jsonl").string();
  s["records"] = records.size();
  return s;
}

ordered_json cmd_augment(const ordered_json& config) {
  ConfigReader r(config, "augment");
  const auto common = read_common(r);
  const fs::path manifest(r.string("manifest"));
  AugmentOp op;
  try {
    op = parse_augment_op(r.string("op"));
  } catch (const Error& e) {
    fail(ErrorKind::Config, e.what());
  }
  const double magnitude = r.number("magnitude");
  const bool include_original = r.boolean("include_original", true);
  const auto out = prepare_out_dir(r.string("out"));
  r.finish();

  const auto records = read_manifest(manifest);
  const auto root = manifest.parent_path();
  std::vector<DatasetRecord> result;
  std::error_code ec;
  fs::create_directories(out / "signals", ec);
  if (ec) fail(ErrorKind::Io, "cannot create '" + (out / "signals").string() + "'");
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& src = records[i];
    if (include_original) {
      auto copy = src;
      copy.path = relative_to(root / src.path, out);
      result.push_back(std::move(copy));
    }
    const auto buf = load_record(src, root);
    const AugmentSpec spec{op, magnitude, derive_seed(common.seed, i)};
    const auto aug = apply_augment(buf, spec);
    DatasetRecord a = src;
    a.id = src.id + std::string(kAugmentMarker) + std::string(to_string(op));
    a.path = "signals/" + a.id + ".f32";
    a.duration_s = static_cast<double>(aug.size()) / src.sample_rate;
    if (op == AugmentOp::Noise) {
      // nominal combined SNR: the injected noise is referenced to the input's total power
      if (!src.snr_db) {
        a.snr_db = magnitude;
      } else {
        const double n0 = std::pow(10.0, -*src.snr_db / 10.0);
        const double n1 = (1.0 + n0) * std::pow(10.0, -magnitude / 10.0);
        a.snr_db = -10.0 * std::log10(n0 + n1);
      }
      a.binary_label = binary_label_for(a.snr_db);
    }
    write_raw_f32(aug, out / a.path);
    result.push_back(std::move(a));
  }
  write_manifest(out / "manifest.jsonl", result);
  write_json(out / "resolved_config.json", r.resolved);
  ordered_json s;
  s["command"] = "augment";
  s["manifest"] = (out / "manifest.jsonl").string();
  s["records"] = result.size();
  s["augmented"] = records.size();
  return s;
}

ordered_json cmd_clean(const ordered_json& config) {
  ConfigReader r(config, "clean");
  const auto common = read_common(r);
  const fs::path manifest(r.string("manifest"));
  OutlierMethod method;
  try {
    method = parse_outlier_method(r.string("method", std::string("zscore")));
  } catch (const Error& e) {
    fail(ErrorKind::Config, e.what());
  }
  const double threshold = r.number("threshold", default_outlier_threshold(method));
  const bool filter = r.boolean("filter", false);
  const auto out = prepare_out_dir(r.string("out"));
  r.finish();

  const auto validation = validate_manifest(manifest, manifest.parent_path());
  std::set<std::string> invalid;
  for (const auto& v : validation.violations) invalid.insert(v.id);

  // Outliers are computed over records that passed validation.
  std::vector<DatasetRecord> usable;
  std::vector<std::string> ids;
  std::vector<FeatureVector> features;
  if (validation.violations.empty() || validation.records_checked > 0) {
    std::vector<DatasetRecord> records;
    try {
      records = read_manifest(manifest);
    } catch (const Error&) {
      // malformed lines are already reported as violations
    }
    for (const auto& rec : records) {
      if (invalid.contains(rec.id)) continue;
      usable.push_back(rec);
      ids.push_back(rec.id);
      features.push_back(extract_features(load_record(rec, manifest.parent_path())));
    }
  }
  ordered_json report;
  report["manifest"] = manifest.string();
  report["validation"] = validation.to_json();
  std::optional<OutlierReport> outliers;
  if (usable.size() >= 4) {
    outliers = detect_outliers(make_feature_table(ids, features), method, threshold);
    report["outliers"] = outliers->to_json();
  } else {
    report["outliers"] = nullptr;
  }
  write_json(out / "clean_report.json", report);

  std::ostringstream text;
  text << validation.to_text();
  if (outliers) {
    text << "outliers (" << to_string(method) << ", threshold " << threshold << "): " << outliers->flagged_ids().size()
         << " flagged\n";
    for (const auto& f : outliers->flags) {
      text << "  " << f.id << ": " << f.feature << " = " << f.value << " outside [" << f.lower << ", " << f.upper
           << "]\n";
    }
  } else {
    text << "outliers: skipped (fewer than 4 valid records)\n";
  }
  write_text_file(out / "clean_report.txt", text.str());

  std::size_t kept = 0;
  if (filter) {
    std::set<std::string> flagged;
    if (outliers) {
      for (const auto& id : outliers->flagged_ids()) flagged.insert(id);
    }
    std::vector<DatasetRecord> filtered;
    for (auto rec : usable) {
      if (flagged.contains(rec.id)) continue;
      rec.path = relative_to(manifest.parent_path() / rec.path, out);
      filtered.push_back(std::move(rec));
    }
    kept = filtered.size();
    write_manifest(out / "manifest.jsonl", filtered);
  }
  write_json(out / "resolved_config.json", r.resolved);
  (void)common;

  if (!validation.ok()) {
    fail(ErrorKind::Validation, "manifest has " + std::to_string(validation.violations.size()) +
                                    " violation(s); see " + (out / "clean_report.txt").string());
  }
  ordered_json s;
  s["command"] = "clean";
  s["records_checked"] = validation.records_checked;
  s["violations"] = validation.violations.size();
  s["outliers_flagged"] = outliers ? outliers->flagged_ids().size() : 0;
  s["report"] = (out / "clean_report.json").string();
  if (filter) {
    s["filtered_manifest"] = (out / "manifest.jsonl").string();
    s["kept"] = kept;
  }
  return s;
}

ordered_json cmd_train(const ordered_json& config) {
  ConfigReader r(config, "train");
  const auto common = read_common(r);
  const fs::path manifest(r.string("manifest"));
  const Task task = parse_task(r.string("task", std::string("classify")));
  const auto keys = read_train_keys(r, common.seed);
  std::optional<LabelMode> mode;
  std::set<SignalClass> denoise_classes;
  if (task == Task::Classify) {
    mode = parse_label_mode(r.string("labels", std::string("binary")));
  } else {
    denoise_classes = parse_classes(r.strings("denoise_classes", class_names({SignalClass::CW, SignalClass::PSK31})));
  }
  const auto out = prepare_out_dir(r.string("out"));
  r.finish();

  const auto all = read_manifest(manifest);
  const auto root = manifest.parent_path();
  TrainedModel trained{nn::Model({8, 8, 1}, {}), {}};
  ordered_json split_json;
  std::size_t n_train = 0, n_val = 0;

  if (task == Task::Classify) {
    const auto data = classification_records(all, *mode);
    if (data.records.empty()) {
      fail(ErrorKind::Validation, "empty dataset: " + manifest.string() + " has no records eligible for classifier training");
    }
    const auto split = stratified_split(data.labels, keys.val_fraction, derive_seed(common.seed, 101));
    trained = train_classifier(data, split, root, *mode, keys, common.seed, common.verbose, "");
    split_json["train"] = ids_json(data.records, split.train);
    split_json["val"] = ids_json(data.records, split.val);
    n_train = split.train.size();
    n_val = split.val.size();
  } else {
    const auto records = denoise_records(all, denoise_classes);
    if (records.empty()) {
      fail(ErrorKind::Validation, "empty dataset: " + manifest.string() +
                                      " has no noisy, regenerable records of the denoise classes");
    }
    std::vector<int> strata;
    for (const auto& rec : records) strata.push_back(static_cast<int>(rec.signal_class));
    const auto split = stratified_split(strata, keys.val_fraction, derive_seed(common.seed, 101));
    auto build = [&](const std::vector<std::size_t>& which) {
      std::vector<nn::Example> set;
      set.reserve(which.size());
      for (auto i : which) {
        const auto noisy = stft(pad_for_reconstruction(load_record(records[i], root)));
        const auto clean = stft(pad_for_reconstruction(render_clean(signal_spec_for(records[i]))));
        set.push_back({denoiser_input(noisy), ratio_mask_target(noisy, clean)});
      }
      return set;
    };
    const auto train_set = build(split.train);
    const auto val_set = build(split.val);
    if (train_set.empty()) fail(ErrorKind::Validation, "empty dataset: the training split has no examples");
    const auto shape = train_set.front().input.shape();
    for (const auto* set : {&train_set, &val_set}) {
      for (const auto& e : *set) {
        if (e.input.shape() != shape) fail(ErrorKind::Validation, "records have differing lengths; denoiser inputs must agree");
      }
    }
    auto model = nn::build_denoiser(shape);
    model.initialize(derive_seed(common.seed, 201));
    auto cfg = keys.train;
    cfg.loss = nn::LossKind::Mse;
    auto history = nn::train(model, train_set, val_set, cfg, progress(common.verbose, cfg.max_epochs, ""));
    trained = {std::move(model), std::move(history)};
    split_json["train"] = ids_json(records, split.train);
    split_json["val"] = ids_json(records, split.val);
    n_train = split.train.size();
    n_val = split.val.size();
  }

  nn::save_model(trained.model, out / "model.hamnn");
  write_json(out / "history.json", trained.history.to_json());
  write_json(out / "split.json", split_json);
  write_json(out / "resolved_config.json", r.resolved);

  ordered_json s;
  s["command"] = "train";
  s["task"] = std::string(to_string(task));
  s["model"] = (out / "model.hamnn").string();
  s["train_records"] = n_train;
  s["val_records"] = n_val;
  s.update(history_summary(trained.history));
  return s;
}

ordered_json cmd_eval(const ordered_json& config) {
  ConfigReader r(config, "eval");
  const auto common = read_common(r);
  const fs::path model_path(r.string("model"));
  const fs::path manifest(r.string("manifest"));
  const auto out = prepare_out_dir(r.string("out"));
  r.finish();

  const auto model = nn::load_model(model_path);
  const auto records = read_manifest(manifest);
  auto report = infer_task(model) == Task::Classify ? evaluate_classifier(model, records, manifest.parent_path())
                                                    : evaluate_denoiser(model, records, manifest.parent_path());
  report.model_hash = sha256_file(model_path);
  report.manifest_hash = sha256_file(manifest);
  report.config = r.resolved;
  report.generated_at = utc_timestamp();
  emit_all(report, out, common.format);
  write_json(out / "resolved_config.json", r.resolved);

  ordered_json s;
  s["command"] = "eval";
  s["task"] = report.task;
  s["report"] = (out / "report.json").string();
  s["aggregate"] = report.to_json()["aggregate"];
  s["aggregate"].erase("per_class");
  return s;
}

ordered_json cmd_denoise(const ordered_json& config) {
  ConfigReader r(config, "denoise");
  read_common(r);
  const fs::path model_path(r.string("model"));
  const fs::path input(r.string("input"));
  const int sample_rate = static_cast<int>(r.unsigned_integer("sample_rate", kDefaultSampleRate));
  const auto reference = r.optional_string("reference");
  const auto out = prepare_out_dir(r.string("out"));
  r.finish();

  const auto model = nn::load_model(model_path);
  const auto noisy = read_signal_file(input, sample_rate);
  const auto result = denoise_signal(model, noisy);
  wav_write(result.signal, out / "denoised.wav");

  ordered_json m;
  m["input"] = input.string();
  m["output"] = (out / "denoised.wav").string();
  m["samples"] = noisy.size();
  m["sample_rate"] = noisy.sample_rate();
  m["mean_mask"] = result.mean_mask;
  m["input_power"] = noisy.power();
  m["output_power"] = result.signal.power();
  if (reference) {
    const auto clean = read_signal_file(*reference, sample_rate);
    if (clean.size() != noisy.size()) fail(ErrorKind::Validation, "reference and input differ in length");
    const auto snr = snr_improvement(clean, noisy, result.signal);
    m["input_snr_db"] = snr.input_db;
    m["output_snr_db"] = snr.output_db;
    m["snr_improvement_db"] = snr.delta_db;
    const auto sc = stft(clean);
    m["spectrogram_mse_noisy"] = spectrogram_mse(stft(noisy), sc);
    m["spectrogram_mse_denoised"] = spectrogram_mse(stft(result.signal), sc);
  }
  write_json(out / "denoise_metrics.json", m);
  write_json(out / "resolved_config.json", r.resolved);
  ordered_json s;
  s["command"] = "denoise";
  s.update(m);
  return s;
}

ordered_json cmd_classify(const ordered_json& config) {
  ConfigReader r(config, "classify");
  read_common(r);
  const fs::path model_path(r.string("model"));
  const fs::path input(r.string("input"));
  const int sample_rate = static_cast<int>(r.unsigned_integer("sample_rate", kDefaultSampleRate));
  const auto out = r.optional_string("out");
  r.finish();

  const auto model = nn::load_model(model_path);
  const auto c = classify_signal(model, read_signal_file(input, sample_rate));
  ordered_json s;
  s["command"] = "classify";
  s["input"] = input.string();
  s["label"] = c.label;
  s["score"] = c.score;
  if (out) {
    const auto dir = prepare_out_dir(*out);
    write_json(dir / "classification.json", s);
    write_json(dir / "resolved_config.json", r.resolved);
  }
  return s;
}

ordered_json cmd_kfold(const ordered_json& config) {
  ConfigReader r(config, "kfold");
  const auto common = read_common(r);
  const fs::path manifest(r.string("manifest"));
  if (parse_task(r.string("task", std::string("classify"))) != Task::Classify) {
    fail(ErrorKind::Unsupported, "kfold: only the classify task supports cross-validation");
  }
  const auto k = r.unsigned_integer("k", 5);
  const auto mode = parse_label_mode(r.string("labels", std::string("binary")));
  const auto keys = read_train_keys(r, common.seed);
  const auto out = prepare_out_dir(r.string("out"));
  r.finish();
  if (k < 2) fail(ErrorKind::Config, "kfold: k must be at least 2");

  const auto root = manifest.parent_path();
  const auto data = classification_records(read_manifest(manifest), mode);
  if (data.records.empty()) {
    fail(ErrorKind::Validation, "empty dataset: " + manifest.string() + " has no records eligible for classifier training");
  }
  const auto folds = nn::kfold_split(data.labels, k, derive_seed(common.seed, 301));
  const auto manifest_hash = sha256_file(manifest);

  ordered_json per_fold = ordered_json::array();
  std::map<std::string, std::vector<double>> metrics;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    std::vector<bool> held(data.records.size(), false);
    for (auto i : folds[f]) held[i] = true;
    Labelled rest;
    std::vector<DatasetRecord> test;
    for (std::size_t i = 0; i < data.records.size(); ++i) {
      if (held[i]) {
        test.push_back(data.records[i]);
      } else {
        rest.records.push_back(data.records[i]);
        rest.labels.push_back(data.labels[i]);
      }
    }
    const auto split = stratified_split(rest.labels, keys.val_fraction, derive_seed(common.seed, 310 + f));
    const auto trained = train_classifier(rest, split, root, mode, keys, derive_seed(common.seed, 400 + f),
                                          common.verbose, "fold " + std::to_string(f + 1) + " ");
    const auto dir = prepare_out_dir((out / ("fold_" + std::to_string(f + 1))).string());
    nn::save_model(trained.model, dir / "model.hamnn");
    write_json(dir / "history.json", trained.history.to_json());
    auto report = evaluate_classifier(trained.model, test, root);
    report.model_hash = sha256_file(dir / "model.hamnn");
    report.manifest_hash = manifest_hash;
    report.config = r.resolved;
    report.config["fold"] = f + 1;
    report.generated_at = utc_timestamp();
    emit_all(report, dir, common.format);

    const auto& cm = *report.aggregate.classification;
    ordered_json fj;
    fj["fold"] = f + 1;
    fj["test_records"] = test.size();
    fj["accuracy"] = cm.accuracy;
    fj["precision"] = cm.macro_precision;
    fj["recall"] = cm.macro_recall;
    fj["f1"] = cm.macro_f1;
    fj["best_epoch"] = trained.history.best_epoch;
    per_fold.push_back(fj);
    metrics["accuracy"].push_back(cm.accuracy);
    metrics["precision"].push_back(cm.macro_precision);
    metrics["recall"].push_back(cm.macro_recall);
    metrics["f1"].push_back(cm.macro_f1);
  }

  ordered_json aggregate;
  for (const char* name : {"accuracy", "precision", "recall", "f1"}) {
    const auto& v = metrics[name];
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    aggregate[name] = {{"mean", mean}, {"std", std::sqrt(var / static_cast<double>(v.size()))}};
  }
  ordered_json summary;
  summary["k"] = k;
  summary["records"] = data.records.size();
  summary["folds"] = per_fold;
  summary["aggregate"] = aggregate;
  write_json(out / "kfold_summary.json", summary);
  write_json(out / "resolved_config.json", r.resolved);

  ordered_json s;
  s["command"] = "kfold";
  s["summary"] = (out / "kfold_summary.json").string();
  s["aggregate"] = aggregate;
  return s;
}

ordered_json run_command(std::string_view command, const ordered_json& config) {
  if (command == "synth") return cmd_synth(config);
  if (command == "augment") return cmd_augment(config);
  if (command == "clean") return cmd_clean(config);
  if (command == "train") return cmd_train(config);
  if (command == "eval") return cmd_eval(config);
  if (command == "denoise") return cmd_denoise(config);
  if (command == "classify") return cmd_classify(config);
  if (command == "kfold") return cmd_kfold(config);
  fail(ErrorKind::Config, "unknown command '" + std::string(command) + "'");
}

}  // namespace hamnet
