// Acceptance runner: one PASS/FAIL line per criterion.
//
//   hamnet_acceptance [--criterion N]... [--work DIR]
//
// With no --criterion every criterion 1..8 runs. Exit status is 0 only when
// every selected criterion passes. Scratch data goes under DIR/cN.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gradcheck.hpp"
#include "hamnet/audio_io.hpp"
#include "hamnet/dataset.hpp"
#include "hamnet/dsp.hpp"
#include "hamnet/error.hpp"
#include "hamnet/eval.hpp"
#include "hamnet/nn/kfold.hpp"
#include "hamnet/nn/serialize.hpp"
#include "hamnet/pipeline.hpp"
#include "hamnet/rng.hpp"
#include "hamnet/synth.hpp"

using namespace hamnet;
using nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

constexpr int kSr = 8000;

/// Collects named sub-checks; the criterion passes when all hold.
class Outcome {
 public:
  void check(bool ok, const std::string& what) {
    if (!ok) {
      ++failed_;
      if (failed_ <= 10) std::cout << "    failed: " << what << "\n";
    }
    ++total_;
  }
  void note(const std::string& s) { notes_.push_back(s); }
  bool passed() const { return failed_ == 0 && total_ > 0; }
  std::string summary() const {
    std::ostringstream o;
    o << total_ - failed_ << "/" << total_ << " checks";
    for (const auto& n : notes_) o << "; " << n;
    return o.str();
  }

 private:
  std::size_t total_ = 0, failed_ = 0;
  std::vector<std::string> notes_;
};

std::string fmt(double v, int precision = 4) {
  std::ostringstream o;
  o << std::setprecision(precision) << v;
  return o.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

fs::path fresh_dir(const fs::path& p) {
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

ordered_json read_json(const fs::path& p) {
  std::ifstream in(p);
  return ordered_json::parse(in);
}

double power(std::span<const double> x) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return acc / static_cast<double>(x.size());
}

// ---- 1: gradients --------------------------------------------------------------

void criterion_1(Outcome& out, const fs::path&) {
  constexpr double kTol = 1e-4;
  constexpr int kShapes = 20;
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(20240101);
  std::map<std::string, double> worst;
  auto record = [&](const std::string& family, const test::GradCheck& c) {
    worst[family] = std::max(worst[family], c.max_rel_error);
    out.check(c.compared > 0 && c.max_rel_error < kTol, c.what + " rel " + fmt(c.max_rel_error));
  };
  auto dim = [&](std::size_t lo, std::size_t hi) { return lo + rng.below(hi - lo + 1); };
  for (int i = 0; i < kShapes; ++i) {
    const std::size_t kh = 1 + 2 * rng.below(3), kw = 1 + 2 * rng.below(3);
    record("conv2d", test::check_conv2d(rng, dim(2, 7), dim(2, 7), dim(1, 3), dim(1, 4), kh, kw));
    record("maxpool", test::check_maxpool(rng, dim(2, 9), dim(2, 9), dim(1, 3)));
    record("dense", test::check_dense(rng, dim(1, 12), dim(1, 6)));
    const nn::Shape act_shape = rng.below(2) ? nn::Shape{dim(1, 12)} : nn::Shape{dim(1, 4), dim(1, 4), dim(1, 3)};
    record("relu", test::check_activation(rng, nn::ActivationKind::Relu, act_shape));
    record("sigmoid", test::check_activation(rng, nn::ActivationKind::Sigmoid, act_shape));
    record("softmax", test::check_activation(rng, nn::ActivationKind::Softmax, act_shape));
    record("bce", test::check_loss(rng, nn::LossKind::Bce, dim(1, 10)));
    record("mse", test::check_loss(rng, nn::LossKind::Mse, dim(1, 10)));
  }
  const double elapsed = seconds_since(t0);
  out.check(elapsed < 30.0, "runtime " + fmt(elapsed) + " s < 30 s");
  for (const auto& [family, w] : worst) out.note(family + " max rel " + fmt(w, 2));
  out.note("runtime " + fmt(elapsed, 3) + " s");
}

// ---- 2: DSP --------------------------------------------------------------------

void criterion_2(Outcome& out, const fs::path&) {
  const SignalClass classes[] = {SignalClass::CW, SignalClass::AM, SignalClass::FM, SignalClass::PSK31,
                                 SignalClass::FSK8};
  const auto w = hann_window(kFftSize);
  double worst_rms = 0.0, worst_parseval = 0.0, worst_awgn = 0.0;
  for (auto c : classes) {
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
      const SnrSetting snr = seed % 2 ? SnrSetting{} : SnrSetting{5.0};
      const auto x = render(make_signal_spec(c, 1.0, kSr, snr, seed));
      const auto spec = stft(x);
      const auto y = istft(spec);
      // interior: first and last fft_size samples excluded
      double err = 0.0;
      std::size_t n = 0;
      for (std::size_t i = kFftSize; i + kFftSize < x.size(); ++i, ++n) err += (x[i] - y[i]) * (x[i] - y[i]);
      const double rms = std::sqrt(err / static_cast<double>(n));
      worst_rms = std::max(worst_rms, rms);
      out.check(y.size() == x.size() && rms < 1e-6, std::string(to_string(c)) + " istft rms " + fmt(rms));

      // Parseval per interior frame against the windowed time-domain energy
      double time = 0.0, freq = 0.0;
      for (std::size_t f = 1; f + 1 < spec.frames(); ++f) {
        for (std::size_t k = 0; k < kFftSize; ++k) time += std::pow(x[f * kHop + k] * w[k], 2);
        for (std::size_t k = 0; k < spec.bins(); ++k) {
          const double scale = (k == 0 || k == kFftSize / 2) ? 1.0 : 2.0;
          freq += scale * std::pow(spec.magnitudes(k, f), 2) / static_cast<double>(kFftSize);
        }
      }
      const double rel = std::abs(freq - time) / time;
      worst_parseval = std::max(worst_parseval, rel);
      out.check(rel < 1e-6, std::string(to_string(c)) + " parseval rel " + fmt(rel));
    }
  }

  for (double target : {-5.0, 0.0, 10.0, 20.0}) {
    for (auto c : classes) {
      for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        const auto s = render_clean(make_signal_spec(c, 1.0, kSr, {}, seed));
        const auto noisy = add_awgn(s, target, derive_seed(seed, 77));
        std::vector<double> residual(s.size());
        for (std::size_t i = 0; i < s.size(); ++i) residual[i] = noisy[i] - s[i];
        const double achieved = 10.0 * std::log10(power(s.samples()) / power(residual));
        worst_awgn = std::max(worst_awgn, std::abs(achieved - target));
        out.check(std::abs(achieved - target) <= 0.5,
                  "awgn " + std::string(to_string(c)) + " target " + fmt(target) + " got " + fmt(achieved));
        out.check(std::abs(estimate_snr(noisy, s) - achieved) < 1e-9, "estimate_snr agrees with direct ratio");
      }
    }
  }

  // normalization invariants
  const auto mm = minmax_normalize(std::vector<double>{-2, 0, 2});
  out.check(mm == std::vector<double>{0.0, 0.5, 1.0}, "minmax [-2,0,2]");
  out.check(minmax_normalize(std::vector<double>{3, 3, 3}) == std::vector<double>{0, 0, 0}, "minmax constant");
  out.check(zscore_normalize(std::vector<double>{1, 3}) == std::vector<double>{-1, 1}, "zscore [1,3]");
  out.check(zscore_normalize(std::vector<double>{7, 7, 7, 7}) == std::vector<double>{0, 0, 0, 0}, "zscore constant");
  Rng rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> v(2 + rng.below(300));
    const double scale = std::pow(10.0, rng.uniform(-3.0, 3.0));
    for (auto& e : v) e = scale * rng.gaussian() + rng.uniform(-100.0, 100.0);
    const auto a = minmax_normalize(v);
    out.check(*std::min_element(a.begin(), a.end()) == 0.0 && *std::max_element(a.begin(), a.end()) == 1.0,
              "minmax range exactly [0,1]");
    out.check(minmax_normalize(a) == a, "minmax idempotent");
    const auto z = zscore_normalize(v);
    double mean = 0.0;
    for (double e : z) mean += e;
    mean /= static_cast<double>(z.size());
    double var = 0.0;
    for (double e : z) var += (e - mean) * (e - mean);
    const double sd = std::sqrt(var / static_cast<double>(z.size()));
    out.check(std::abs(mean) < 1e-9, "zscore mean " + fmt(mean));
    out.check(std::abs(sd - 1.0) < 1e-6, "zscore std " + fmt(sd));
  }
  out.note("worst istft rms " + fmt(worst_rms, 2));
  out.note("worst parseval rel " + fmt(worst_parseval, 2));
  out.note("worst awgn error " + fmt(worst_awgn, 3) + " dB");
}

// ---- 3: decoders ---------------------------------------------------------------

void criterion_3(Outcome& out, const fs::path&) {
  Rng rng(31337);
  static constexpr std::string_view kLetters = "ABCDEFGHIJKLMNOPQRSTUVWXYZ";
  std::size_t cw_exact = 0;
  for (int i = 0; i < 50; ++i) {
    std::string text;
    const std::size_t words = 1 + rng.below(3);
    for (std::size_t wd = 0; wd < words; ++wd) {
      if (wd) text += ' ';
      const std::size_t len = 1 + rng.below(6);
      for (std::size_t j = 0; j < len; ++j) text += kLetters[rng.below(kLetters.size())];
    }
    const double wpm = rng.uniform(15.0, 30.0);
    const double tone = rng.uniform(400.0, 1200.0);
    const auto sig = gen_cw(text, wpm, tone, kSr);
    const auto decoded = decode_cw(sig.buffer, wpm, tone);
    const bool exact = decoded.text == text;
    cw_exact += exact;
    out.check(exact, "cw '" + text + "' at " + fmt(wpm) + " wpm decoded as '" + decoded.text + "'");
  }
  std::size_t psk_zero = 0;
  for (int i = 0; i < 20; ++i) {
    std::vector<std::uint8_t> bits(256);
    for (auto& b : bits) b = static_cast<std::uint8_t>(rng.below(2));
    const double carrier = rng.uniform(500.0, 2000.0);
    const auto buf = gen_psk31(bits, carrier, kSr);
    const auto rx = decode_psk31(buf, carrier);
    const double e = ber(bits, rx);
    psk_zero += e == 0.0;
    out.check(rx.size() == bits.size() && e == 0.0, "psk31 payload " + std::to_string(i) + " ber " + fmt(e));
  }
  out.note("cw exact " + std::to_string(cw_exact) + "/50");
  out.note("psk31 zero-ber " + std::to_string(psk_zero) + "/20");
}

// ---- 4: classification ---------------------------------------------------------

/// Seeded stratified holdout of a manifest into train/test manifests beside it.
std::pair<std::size_t, std::size_t> holdout(const fs::path& manifest, double test_fraction, std::uint64_t seed,
                                            const std::function<std::string(const DatasetRecord&)>& stratum) {
  const auto records = read_manifest(manifest);
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < records.size(); ++i) groups[stratum(records[i])].push_back(i);
  Rng rng(seed);
  std::set<std::size_t> test;
  for (auto& [key, members] : groups) {
    for (std::size_t i = members.size(); i > 1; --i) std::swap(members[i - 1], members[rng.below(i)]);
    const auto n = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(members.size())));
    test.insert(members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n));
  }
  std::vector<DatasetRecord> tr, te;
  for (std::size_t i = 0; i < records.size(); ++i) (test.contains(i) ? te : tr).push_back(records[i]);
  write_manifest(manifest.parent_path() / "train.jsonl", tr);
  write_manifest(manifest.parent_path() / "test.jsonl", te);
  return {tr.size(), te.size()};
}

void criterion_4(Outcome& out, const fs::path& work) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto dir = fresh_dir(work / "c4");
  // 5 classes x {clean, 20 dB, 0 dB, 5 dB} x 100 = 2000; half clean, half noisy
  run_command("synth", {{"classes", {"CW", "AM", "FM", "PSK31", "FSK8"}},
                        {"count_per_cell", 100},
                        {"snr_grid", {"clean", 20, 0, 5}},
                        {"duration_s", 1.0},
                        {"seed", 4004},
                        {"out", (dir / "data").string()}});
  const auto manifest = dir / "data/manifest.jsonl";
  const auto records = read_manifest(manifest);
  std::size_t clean = 0, noisy = 0;
  for (const auto& r : records) {
    if (r.binary_label == BinaryLabel::Clean) ++clean;
    if (r.binary_label == BinaryLabel::Noisy) ++noisy;
  }
  out.check(records.size() == 2000 && clean == 1000 && noisy == 1000,
            "2000 balanced segments (clean " + std::to_string(clean) + ", noisy " + std::to_string(noisy) + ")");

  const auto [n_train, n_test] = holdout(manifest, 0.2, 4005, [](const DatasetRecord& r) {
    return std::string(to_string(r.signal_class)) + (r.binary_label == BinaryLabel::Noisy ? "/noisy" : "/clean");
  });
  const auto t = run_command("train", {{"manifest", (dir / "data/train.jsonl").string()},
                                       {"task", "classify"},
                                       {"labels", "binary"},
                                       {"epochs", 10},
                                       {"batch_size", 32},
                                       {"patience", 3},
                                       {"seed", 4006},
                                       {"verbose", true},
                                       {"out", (dir / "model").string()}});
  run_command("eval", {{"model", (dir / "model/model.hamnn").string()},
                       {"manifest", (dir / "data/test.jsonl").string()},
                       {"out", (dir / "eval").string()}});
  const auto report = read_json(dir / "eval/report.json");
  const double acc = report["aggregate"]["accuracy"].get<double>();
  const double elapsed = seconds_since(t0);
  out.check(report["records"].size() == n_test, "every held-out record evaluated");
  out.check(acc >= 0.95, "held-out accuracy " + fmt(acc) + " >= 0.95");
  out.check(elapsed < 15 * 60.0, "runtime " + fmt(elapsed) + " s < 900 s");
  out.note("train " + std::to_string(n_train) + " / held-out " + std::to_string(n_test));
  out.note("epochs run " + t["epochs_run"].dump() + ", best " + t["best_epoch"].dump());
  out.note("held-out accuracy " + fmt(acc));
  out.note("runtime " + fmt(elapsed, 4) + " s");
}

// ---- 5: denoising --------------------------------------------------------------

void criterion_5(Outcome& out, const fs::path& work) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto dir = fresh_dir(work / "c5");
  run_command("synth", {{"classes", {"CW", "PSK31"}},
                        {"count_per_cell", 500},
                        {"snr_grid", {0}},
                        {"seed", 5005},
                        {"out", (dir / "train").string()}});
  run_command("synth", {{"classes", {"CW", "PSK31"}},
                        {"count_per_cell", 25},
                        {"snr_grid", {0}},
                        {"seed", 5006},
                        {"out", (dir / "test").string()}});
  const auto t = run_command("train", {{"manifest", (dir / "train/manifest.jsonl").string()},
                                       {"task", "denoise"},
                                       {"epochs", 10},
                                       {"batch_size", 32},
                                       {"patience", 3},
                                       {"seed", 5007},
                                       {"verbose", true},
                                       {"out", (dir / "model").string()}});
  run_command("eval", {{"model", (dir / "model/model.hamnn").string()},
                       {"manifest", (dir / "test/manifest.jsonl").string()},
                       {"out", (dir / "eval").string()}});
  const auto report = read_json(dir / "eval/report.json");
  const auto& records = report["records"];
  double delta = 0.0, ber_before = 0.0, ber_after = 0.0;
  std::size_t improved = 0, n_psk = 0;
  for (const auto& r : records) {
    delta += r["snr_improvement_db"].get<double>();
    improved += r["spectrogram_mse_denoised"].get<double>() < r["spectrogram_mse_noisy"].get<double>();
    if (r["class"] == "PSK31") {
      ++n_psk;
      ber_before += r["ber_before"].get<double>();
      ber_after += r["ber_after"].get<double>();
    }
  }
  const std::size_t n = records.size();
  delta /= static_cast<double>(n);
  ber_before /= static_cast<double>(n_psk);
  ber_after /= static_cast<double>(n_psk);
  const double frac = static_cast<double>(improved) / static_cast<double>(n);
  const double elapsed = seconds_since(t0);
  out.check(n == 50, "50 held-out segments");
  out.check(delta >= 3.0, "mean snr improvement " + fmt(delta) + " dB >= 3");
  out.check(frac >= 0.9, "mse improved on " + fmt(frac) + " >= 0.9");
  out.check(n_psk > 0 && ber_after <= ber_before, "psk31 ber after " + fmt(ber_after) + " <= before " + fmt(ber_before));
  out.check(elapsed < 30 * 60.0, "runtime " + fmt(elapsed) + " s < 1800 s");
  out.note("epochs run " + t["epochs_run"].dump() + ", best " + t["best_epoch"].dump());
  out.note("mean snr improvement " + fmt(delta) + " dB");
  out.note("mse improved " + std::to_string(improved) + "/" + std::to_string(n));
  out.note("psk31 ber " + fmt(ber_before) + " -> " + fmt(ber_after));
  out.note("runtime " + fmt(elapsed, 4) + " s");
}

// ---- 6: k-fold -----------------------------------------------------------------

void criterion_6(Outcome& out, const fs::path&) {
  Rng rng(6006);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t k = 2 + rng.below(9);
    const std::size_t n_classes = 2 + rng.below(4);
    std::vector<int> labels;
    for (std::size_t c = 0; c < n_classes; ++c) {
      const std::size_t count = k + rng.below(40);
      labels.insert(labels.end(), count, static_cast<int>(c));
    }
    for (std::size_t i = labels.size(); i > 1; --i) std::swap(labels[i - 1], labels[rng.below(i)]);
    const auto folds = nn::kfold_split(labels, k, rng.next_u64());
    const std::string tag = "trial " + std::to_string(trial) + " k=" + std::to_string(k);
    out.check(folds.size() == k, tag + " fold count");

    std::vector<int> seen(labels.size(), 0);
    for (const auto& f : folds) {
      for (auto i : f) {
        if (i < seen.size()) ++seen[i];
      }
    }
    out.check(std::all_of(seen.begin(), seen.end(), [](int s) { return s == 1; }), tag + " exact partition");

    std::map<int, double> totals;
    for (int l : labels) totals[l] += 1.0;
    for (const auto& f : folds) {
      std::map<int, double> counts;
      for (auto i : f) counts[labels[i]] += 1.0;
      for (const auto& [label, total] : totals) {
        const double expected = total / static_cast<double>(k);
        out.check(std::abs(counts[label] - expected) <= 1.0, tag + " class " + std::to_string(label) + " stratified");
      }
    }
  }
}

// ---- 7: reproducibility ---------------------------------------------------------

struct PipelineRun {
  ordered_json report;
  std::vector<std::uint8_t> model;
  std::vector<std::uint8_t> manifest;
};

PipelineRun run_pipeline(const fs::path& dir) {
  fresh_dir(dir);
  run_command("synth", {{"classes", {"CW", "AM", "FM", "PSK31", "FSK8"}},
                        {"count_per_cell", 8},
                        {"snr_grid", {"clean", 0}},
                        {"seed", 7007},
                        {"out", (dir / "data").string()}});
  run_command("train", {{"manifest", (dir / "data/manifest.jsonl").string()},
                        {"task", "classify"},
                        {"epochs", 2},
                        {"seed", 7007},
                        {"out", (dir / "model").string()}});
  run_command("eval", {{"model", (dir / "model/model.hamnn").string()},
                       {"manifest", (dir / "data/manifest.jsonl").string()},
                       {"out", (dir / "eval").string()}});
  return {read_json(dir / "eval/report.json"), read_file_bytes(dir / "model/model.hamnn"),
          read_file_bytes(dir / "data/manifest.jsonl")};
}

void criterion_7(Outcome& out, const fs::path& work) {
  const auto dir = work / "c7/run";
  const auto a = run_pipeline(dir);
  const auto b = run_pipeline(dir);
  out.check(a.manifest == b.manifest, "manifest bytes identical");
  out.check(a.model == b.model, "model bytes identical");
  auto ra = a.report, rb = b.report;
  out.check(ra.contains("generated_at") && rb.contains("generated_at"), "timestamp key present");
  ra.erase("generated_at");
  rb.erase("generated_at");
  out.check(ra == rb, "reports identical apart from generated_at");
  out.check(ra.dump() == rb.dump(), "report serializations identical apart from generated_at");
  out.check(nn::encode_model(nn::decode_model(a.model)) == a.model, "model file round-trips bit-exactly");
  const auto diff = ordered_json::diff(a.report, b.report);
  std::set<std::string> paths;
  for (const auto& d : diff) paths.insert(d["path"].get<std::string>());
  out.check(paths.empty() || paths == std::set<std::string>{"/generated_at"}, "generated_at is the only differing key");
}

// ---- 8: formats ----------------------------------------------------------------

std::uint32_t le32(const std::vector<std::uint8_t>& b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) | static_cast<std::uint32_t>(b[at + 1]) << 8 |
         static_cast<std::uint32_t>(b[at + 2]) << 16 | static_cast<std::uint32_t>(b[at + 3]) << 24;
}
std::uint16_t le16(const std::vector<std::uint8_t>& b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | b[at + 1] << 8);
}

/// Error kind of f, Internal when it succeeded, nullopt when something other than hamnet::Error escaped.
std::optional<ErrorKind> kind_of(const std::function<void()>& f, std::string* message = nullptr) {
  try {
    f();
  } catch (const Error& e) {
    if (message) *message = e.what();
    return e.kind();
  } catch (...) {
    return std::nullopt;
  }
  return ErrorKind::Internal;
}

void model_format(Outcome& out, Rng& rng) {
  auto model = nn::build_classifier({129, 61, 1});
  model.initialize(8008);
  const auto bytes = nn::encode_model(model);
  out.check(bytes.size() > 15 && std::memcmp(bytes.data(), "HAMNN1\n", 7) == 0, "model magic");
  std::uint64_t hlen = 0;
  for (int i = 7; i >= 0; --i) hlen = hlen << 8 | bytes[7 + static_cast<std::size_t>(i)];
  out.check(15 + hlen <= bytes.size(), "model header length fits");
  const auto header = nlohmann::json::parse(bytes.begin() + 15, bytes.begin() + 15 + static_cast<std::ptrdiff_t>(hlen));
  out.check(header["format_version"] == 1, "format_version 1");
  out.check(header["input_shape"] == nlohmann::json::array({129, 61, 1}), "input_shape");
  out.check(header["layers"].size() == model.layers().size(), "ordered layer specs");
  const std::size_t blob_start = 15 + hlen;
  std::size_t expected_offset = 0, tensor = 0;
  bool blobs_match = true;
  for (std::size_t l = 0; l < model.params().size(); ++l) {
    for (std::size_t s = 0; s < model.params()[l].size(); ++s, ++tensor) {
      const auto& entry = header["tensors"].at(tensor);
      const auto& t = model.params()[l][s];
      std::vector<std::size_t> shape = entry["shape"].get<std::vector<std::size_t>>();
      out.check(shape == t.shape(), "tensor " + std::to_string(tensor) + " shape");
      out.check(entry["offset"] == expected_offset, "tensor " + std::to_string(tensor) + " offset");
      out.check(entry["length"] == 4 * t.size(), "tensor " + std::to_string(tensor) + " length");
      out.check(entry["name"].is_string(), "tensor name");
      for (std::size_t i = 0; i < t.size() && blobs_match; ++i) {
        const std::size_t at = blob_start + expected_offset + 4 * i;
        const std::uint32_t raw = le32(bytes, at);
        float f;
        std::memcpy(&f, &raw, 4);
        blobs_match = f == static_cast<float>(t[i]);
      }
      expected_offset += 4 * t.size();
    }
  }
  out.check(tensor == header["tensors"].size(), "tensor manifest complete");
  out.check(blobs_match, "blobs are little-endian float32 row-major in manifest order");
  out.check(bytes.size() == blob_start + expected_offset, "file ends after the last blob");

  auto magic = bytes;
  magic[2] ^= 0x40;
  out.check(kind_of([&] { nn::decode_model(magic); }) == ErrorKind::FormatMagic, "corrupt magic -> magic error");
  auto cut = bytes;
  cut.pop_back();
  std::string msg;
  out.check(kind_of([&] { nn::decode_model(cut); }, &msg) == ErrorKind::FormatTruncated, "truncated blob -> truncation error");
  out.check(msg.find(std::to_string(expected_offset)) != std::string::npos &&
                msg.find(std::to_string(expected_offset - 1)) != std::string::npos,
            "truncation error names expected and actual length");
  auto versioned_header = header;
  versioned_header["format_version"] = 99;
  const auto text = versioned_header.dump();
  std::vector<std::uint8_t> versioned(bytes.begin(), bytes.begin() + 7);
  for (int i = 0; i < 8; ++i) versioned.push_back(static_cast<std::uint8_t>(text.size() >> (8 * i)));
  versioned.insert(versioned.end(), text.begin(), text.end());
  versioned.insert(versioned.end(), bytes.begin() + static_cast<std::ptrdiff_t>(blob_start), bytes.end());
  out.check(kind_of([&] { nn::decode_model(versioned); }) == ErrorKind::FormatVersion, "version mismatch -> version error");

  std::size_t crashes = 0, accepted_garbage = 0;
  for (int trial = 0; trial < 300; ++trial) {
    auto bad = bytes;
    const std::size_t flips = 1 + rng.below(4);
    for (std::size_t f = 0; f < flips; ++f) bad[rng.below(blob_start)] = static_cast<std::uint8_t>(rng.below(256));
    if (rng.below(3) == 0) bad.resize(rng.below(bad.size()));
    const auto k = kind_of([&] { nn::decode_model(bad); });
    if (!k) ++crashes;
    if (k == ErrorKind::Internal && bad.size() != bytes.size()) ++accepted_garbage;
  }
  out.check(crashes == 0, "random model corruption raises only hamnet errors (" + std::to_string(crashes) + " escaped)");
  out.check(accepted_garbage == 0, "resized model never decodes");
}

void wav_format(Outcome& out, Rng& rng) {
  std::vector<double> x(1000);
  for (auto& v : x) v = rng.uniform(-1.2, 1.2);
  x[0] = 1.5;
  x[1] = -1.5;
  x[2] = 0.5 / 32767.0;    // ties round away from zero
  x[3] = -0.5 / 32767.0;
  const SampleBuffer buf(x, 11025);
  const auto b = encode_wav(buf);
  out.check(b.size() == 44 + 2 * x.size(), "wav size 44 + 2n");
  out.check(std::memcmp(b.data(), "RIFF", 4) == 0 && std::memcmp(b.data() + 8, "WAVE", 4) == 0, "RIFF/WAVE tags");
  out.check(le32(b, 4) == b.size() - 8, "RIFF chunk size");
  out.check(std::memcmp(b.data() + 12, "fmt ", 4) == 0 && le32(b, 16) == 16, "fmt chunk");
  out.check(le16(b, 20) == 1, "format code 1 (PCM)");
  out.check(le16(b, 22) == 1, "channels 1");
  out.check(le32(b, 24) == 11025, "sample rate preserved");
  out.check(le32(b, 28) == 2 * 11025, "byte rate");
  out.check(le16(b, 32) == 2 && le16(b, 34) == 16, "block align 2, 16 bits");
  out.check(std::memcmp(b.data() + 36, "data", 4) == 0 && le32(b, 40) == 2 * x.size(), "data chunk");
  bool samples_ok = true;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double c = std::clamp(x[i], -1.0, 1.0) * 32767.0;
    const auto expected = static_cast<std::int16_t>(c < 0 ? -std::floor(-c + 0.5) : std::floor(c + 0.5));
    samples_ok &= static_cast<std::int16_t>(le16(b, 44 + 2 * i)) == expected;
  }
  out.check(samples_ok, "samples clamp, scale by 32767, round half away from zero");
  out.check(static_cast<std::int16_t>(le16(b, 44)) == 32767, "1.5 stored as 32767");
  const auto back = decode_wav(b);
  out.check(back.sample_rate() == 11025 && back.size() == x.size(), "decode preserves rate and length");
  out.check(back[5] == static_cast<std::int16_t>(le16(b, 54)) / 32768.0, "read divides by 32768");

  auto stereo = b;
  stereo[22] = 2;
  std::string msg;
  out.check(kind_of([&] { decode_wav(stereo); }, &msg) == ErrorKind::Unsupported &&
                msg.find("channel") != std::string::npos,
            "stereo -> unsupported naming channels");
  auto fl = b;
  fl[20] = 3;
  out.check(kind_of([&] { decode_wav(fl); }, &msg) == ErrorKind::Unsupported && msg.find("format") != std::string::npos,
            "float -> unsupported naming the format code");
  auto bits = b;
  bits[34] = 24;
  out.check(kind_of([&] { decode_wav(bits); }) == ErrorKind::Unsupported, "24-bit -> unsupported");
  auto riff = b;
  riff[0] = 'X';
  out.check(kind_of([&] { decode_wav(riff); }) == ErrorKind::Format, "bad RIFF tag -> format error");
  std::size_t crashes = 0;
  for (int trial = 0; trial < 300; ++trial) {
    auto bad = b;
    for (std::size_t f = 0; f < 1 + rng.below(4); ++f) bad[rng.below(44)] = static_cast<std::uint8_t>(rng.below(256));
    if (rng.below(3) == 0) bad.resize(rng.below(bad.size()));
    if (!kind_of([&] { decode_wav(bad); })) ++crashes;
  }
  out.check(crashes == 0, "random WAV corruption raises only hamnet errors");
}

void criterion_8(Outcome& out, const fs::path& work) {
  Rng rng(8080);
  model_format(out, rng);
  wav_format(out, rng);
  // file-level: a truncated model on disk and a missing file are distinct errors
  const auto dir = fresh_dir(work / "c8");
  auto model = nn::build_denoiser({129, 64, 1});
  model.initialize(1);
  nn::save_model(model, dir / "m.hamnn");
  auto bytes = read_file_bytes(dir / "m.hamnn");
  bytes.resize(bytes.size() - 1);
  write_file_bytes(dir / "cut.hamnn", bytes);
  out.check(kind_of([&] { nn::load_model(dir / "cut.hamnn"); }) == ErrorKind::FormatTruncated, "truncated model file");
  out.check(kind_of([&] { nn::load_model(dir / "none.hamnn"); }) == ErrorKind::Io, "missing model file -> io error");
  out.check(kind_of([&] { wav_read(dir / "m.hamnn"); }) == ErrorKind::Format, "model read as wav -> format error");
}

struct Criterion {
  const char* name;
  void (*run)(Outcome&, const fs::path&);
};

const Criterion kCriteria[] = {
    {"gradient checks", criterion_1},     {"dsp suite", criterion_2},       {"decoder round trips", criterion_3},
    {"classification experiment", criterion_4}, {"denoising experiment", criterion_5},
    {"k-fold machinery", criterion_6},    {"reproducibility", criterion_7}, {"format conformance", criterion_8},
};

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> selected;
  fs::path work = fs::temp_directory_path() / "hamnet_acceptance";
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--criterion" && i + 1 < argc) {
      selected.push_back(std::atoi(argv[++i]));
    } else if (arg == "--work" && i + 1 < argc) {
      work = argv[++i];
    } else {
      std::cerr << "usage: " << argv[0] << " [--criterion N]... [--work DIR]\n";
      return 2;
    }
  }
  if (selected.empty()) selected = {1, 2, 3, 4, 5, 6, 7, 8};
  fs::create_directories(work);

  bool all = true;
  for (int n : selected) {
    if (n < 1 || n > 8) {
      std::cerr << "criterion must be 1..8\n";
      return 2;
    }
    const auto& c = kCriteria[n - 1];
    Outcome out;
    try {
      c.run(out, work);
    } catch (const std::exception& e) {
      out.check(false, std::string("exception: ") + e.what());
    }
    std::cout << (out.passed() ? "PASS" : "FAIL") << " criterion " << n << " (" << c.name << "): " << out.summary()
              << std::endl;
    all &= out.passed();
  }
  return all ? 0 : 1;
}
