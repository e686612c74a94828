// hamnet-cli: command-line front end over the C API.
//
// Each subcommand builds a JSON config (config file first, then flags, then
// --set overrides) and hands it to hamnet_run_command. The command summary
// is printed to stdout as JSON. Failures print one line to stderr:
//   hamnet-cli: error kind=<status> exit=<code>: <message>
// Exit codes: 0 ok, 1 bad input (parameter, config, validation, format,
// unsupported, training), 2 I/O, 3 internal.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hamnet.h"

using nlohmann::ordered_json;

namespace {

enum class Kind { String, Integer, Number, List, Flag, NegFlag };

struct KeyFlag {
  const char* flag;  // e.g. "--batch-size"
  const char* key;   // config key
  Kind kind;
  const char* help;
};

const KeyFlag kManifest{"--manifest", "manifest", Kind::String, "Input manifest (JSONL)"};
const KeyFlag kModel{"--model", "model", Kind::String, "Model file (.hamnn)"};
const KeyFlag kInput{"--input", "input", Kind::String, "Input signal (.wav, or raw float32)"};
const KeyFlag kSampleRate{"--sample-rate", "sample_rate", Kind::Integer, "Sample rate in Hz (raw input)"};
const KeyFlag kLabels{"--labels", "labels", Kind::String, "binary or class"};

const std::vector<KeyFlag> kTrainFlags = {
    {"--epochs", "epochs", Kind::Integer, "Maximum epochs"},
    {"--batch-size", "batch_size", Kind::Integer, "Mini-batch size"},
    {"--learning-rate", "learning_rate", Kind::Number, "Adam learning rate"},
    {"--patience", "patience", Kind::Integer, "Early-stopping patience in epochs"},
    {"--val-fraction", "val_fraction", Kind::Number, "Validation fraction per label"},
};

std::map<std::string, std::vector<KeyFlag>> command_flags() {
  std::map<std::string, std::vector<KeyFlag>> m;
  m["synth"] = {{"--classes", "classes", Kind::List, "Comma-separated signal classes"},
                {"--count-per-cell", "count_per_cell", Kind::Integer, "Records per class and SNR setting"},
                {"--snr-grid", "snr_grid", Kind::List, "Comma-separated SNR values in dB or 'clean'"},
                {"--duration", "duration_s", Kind::Number, "Segment duration in seconds"},
                kSampleRate};
  m["augment"] = {kManifest,
                  {"--op", "op", Kind::String, "noise, stretch, pitch, gain or crop_pad"},
                  {"--magnitude", "magnitude", Kind::Number, "Operation magnitude"},
                  {"--no-original", "include_original", Kind::NegFlag, "Omit the source records"}};
  m["clean"] = {kManifest,
                {"--method", "method", Kind::String, "zscore or iqr"},
                {"--threshold", "threshold", Kind::Number, "Outlier threshold"},
                {"--filter", "filter", Kind::Flag, "Write a manifest without flagged records"}};
  m["train"] = {kManifest,
                {"--task", "task", Kind::String, "classify or denoise"},
                kLabels,
                {"--denoise-classes", "denoise_classes", Kind::List, "Classes used for denoiser training"}};
  m["train"].insert(m["train"].end(), kTrainFlags.begin(), kTrainFlags.end());
  m["eval"] = {kModel, kManifest};
  m["denoise"] = {kModel, kInput, kSampleRate,
                  {"--reference", "reference", Kind::String, "Clean reference for SNR metrics"}};
  m["classify"] = {kModel, kInput, kSampleRate};
  m["kfold"] = {kManifest, {"--k", "k", Kind::Integer, "Number of folds"}, kLabels};
  m["kfold"].insert(m["kfold"].end(), kTrainFlags.begin(), kTrainFlags.end());
  return m;
}

const std::map<std::string, std::string> kDescriptions = {
    {"synth", "Generate a synthetic dataset"},
    {"augment", "Write an augmented copy of a dataset"},
    {"clean", "Validate a dataset and flag feature outliers"},
    {"train", "Train a classifier or denoiser"},
    {"eval", "Evaluate a model on a dataset"},
    {"denoise", "Denoise one signal file"},
    {"classify", "Classify one signal file"},
    {"kfold", "Stratified k-fold cross-validation of a classifier"},
};

int exit_code_for(hamnet_status s) {
  switch (s) {
    case HAMNET_OK: return 0;
    case HAMNET_E_IO: return 2;
    case HAMNET_E_INTERNAL: return 3;
    default: return 1;
  }
}

int report_error(const std::string& kind, int code, const std::string& message) {
  std::string one_line = message;
  for (auto& c : one_line) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  std::cerr << "hamnet-cli: error kind=" << kind << " exit=" << code << ": " << one_line << std::endl;
  return code;
}

/// Splits "a,b,c"; numeric entries become numbers.
ordered_json parse_list(const std::string& s) {
  ordered_json out = ordered_json::array();
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto end = s.find(',', start);
    const auto item = s.substr(start, end == std::string::npos ? std::string::npos : end - start);
    if (!item.empty()) {
      try {
        std::size_t used = 0;
        const double d = std::stod(item, &used);
        if (used == item.size()) {
          out.push_back(d);
        } else {
          out.push_back(item);
        }
      } catch (const std::exception&) {
        out.push_back(item);
      }
    }
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return out;
}

/// Value of a --set override: JSON when it parses, else the literal string.
ordered_json parse_override_value(const std::string& s) {
  try {
    return ordered_json::parse(s);
  } catch (const nlohmann::json::parse_error&) {
    return s;
  }
}

struct Invocation {
  std::optional<std::string> config_file;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> format;
  bool verbose = false;
  std::vector<std::string> sets;
  std::map<std::string, std::string> values;  // config key -> raw flag text
  std::map<std::string, bool> flags;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hamnet: synthetic amateur-radio signals, denoising and classification"};
  app.set_version_flag("--version", std::string(hamnet_version()));
  app.require_subcommand(1);

  const auto flag_table = command_flags();
  std::map<std::string, Invocation> inv;
  for (const auto& [name, flags] : flag_table) {
    auto* sub = app.add_subcommand(name, kDescriptions.at(name));
    auto& in = inv[name];
    sub->add_option("--config", in.config_file, "JSON config file; flags override its keys");
    sub->add_option("--seed", in.seed, "Master seed");
    sub->add_option("--out", in.out, "Output directory");
    sub->add_option("--format", in.format, "Report format: json or markdown");
    sub->add_flag("--verbose", in.verbose, "Log training progress to stderr");
    sub->add_option("--set", in.sets, "Override any config key: key=value (value parsed as JSON when possible)");
    for (const auto& f : flags) {
      if (f.kind == Kind::Flag || f.kind == Kind::NegFlag) {
        sub->add_flag_callback(f.flag, [&in, f] { in.flags[f.key] = f.kind == Kind::Flag; }, f.help);
      } else {
        sub->add_option_function<std::string>(f.flag, [&in, f](const std::string& v) { in.values[f.key] = v; },
                                              f.help);
      }
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("usage", 1, e.what());
  }

  const std::string command = app.get_subcommands().front()->get_name();
  const auto& in = inv.at(command);

  ordered_json config = ordered_json::object();
  if (in.config_file) {
    std::ifstream file(*in.config_file);
    if (!file) return report_error("io", 2, "cannot open config file '" + *in.config_file + "'");
    try {
      config = ordered_json::parse(file);
    } catch (const nlohmann::json::parse_error& e) {
      return report_error("config", 1, "config file '" + *in.config_file + "' is not valid JSON: " + e.what());
    }
    if (!config.is_object()) return report_error("config", 1, "config file must hold a JSON object");
  }
  if (in.seed) config["seed"] = *in.seed;
  if (in.out) config["out"] = *in.out;
  if (in.format) config["format"] = *in.format;
  if (in.verbose) config["verbose"] = true;
  for (const auto& f : flag_table.at(command)) {
    if (const auto it = in.values.find(f.key); it != in.values.end()) {
      const auto& raw = it->second;
      try {
        switch (f.kind) {
          case Kind::String: config[f.key] = raw; break;
          case Kind::Integer: {
            std::size_t used = 0;
            const long long v = std::stoll(raw, &used);
            if (used != raw.size()) throw std::invalid_argument(raw);
            config[f.key] = v;
            break;
          }
          case Kind::Number: {
            std::size_t used = 0;
            const double v = std::stod(raw, &used);
            if (used != raw.size()) throw std::invalid_argument(raw);
            config[f.key] = v;
            break;
          }
          case Kind::List: config[f.key] = parse_list(raw); break;
          default: break;
        }
      } catch (const std::exception&) {
        return report_error("config", 1, std::string(f.flag) + ": cannot parse '" + raw + "'");
      }
    }
    if (const auto it = in.flags.find(f.key); it != in.flags.end()) config[f.key] = it->second;
  }
  for (const auto& s : in.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) return report_error("config", 1, "--set expects key=value, got '" + s + "'");
    config[s.substr(0, eq)] = parse_override_value(s.substr(eq + 1));
  }

  char* result = nullptr;
  const hamnet_status status = hamnet_run_command(command.c_str(), config.dump().c_str(), &result);
  if (status != HAMNET_OK) return report_error(hamnet_status_name(status), exit_code_for(status), hamnet_last_error());
  std::cout << ordered_json::parse(result).dump(2) << std::endl;
  hamnet_string_free(result);
  return 0;
}
