#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "hamnet/audio_io.hpp"
#include "hamnet/clean.hpp"
#include "hamnet/dataset.hpp"
#include "hamnet/error.hpp"
#include "hamnet/rng.hpp"
#include "hamnet/synth.hpp"
#include "support.hpp"

using namespace hamnet;
using doctest::Approx;

namespace {
constexpr int kSr = 8000;

double sum(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

FeatureTable table_of(const std::vector<std::vector<double>>& rows) {
  FeatureTable t;
  t.feature_names = {"f0"};
  if (!rows.empty()) {
    for (std::size_t i = 1; i < rows[0].size(); ++i) t.feature_names.push_back("f" + std::to_string(i));
  }
  for (std::size_t i = 0; i < rows.size(); ++i) t.ids.push_back("r" + std::to_string(i));
  t.rows = rows;
  return t;
}
}  // namespace

TEST_SUITE("clean") {
  TEST_CASE("lowpass response by direct DTFT") {
    const double cut[] = {1000.0};
    const auto lp = design_fir(FilterKind::Lowpass, cut, 101, kSr);
    REQUIRE(lp.taps.size() == 101);
    CHECK(std::abs(test::dtft_gain_db(lp.taps, 100, kSr)) < 0.1);
    CHECK(test::dtft_gain_db(lp.taps, 3000, kSr) < -40.0);
    CHECK(sum(lp.taps) == Approx(1.0).epsilon(0.01));
    for (std::size_t i = 0; i < 101; ++i) REQUIRE(std::abs(lp.taps[i] - lp.taps[100 - i]) < 1e-12);
  }

  TEST_CASE("highpass and bandpass") {
    const double cut[] = {1000.0};
    const auto hp = design_fir(FilterKind::Highpass, cut, 101, kSr);
    CHECK(std::abs(sum(hp.taps)) < 0.01);
    CHECK(std::abs(test::dtft_gain_db(hp.taps, 3000, kSr)) < 0.1);
    const double band[] = {500.0, 700.0};
    const auto bp = design_fir(FilterKind::Bandpass, band, 201, kSr);
    CHECK(std::abs(test::dtft_gain_db(bp.taps, 600, kSr)) < 0.1);
    CHECK(test::dtft_gain_db(bp.taps, 1500, kSr) < -40.0);
    for (std::size_t i = 0; i < 201; ++i) REQUIRE(std::abs(bp.taps[i] - bp.taps[200 - i]) < 1e-12);
  }

  TEST_CASE("design errors") {
    const double cut[] = {1000.0};
    const double bad[] = {4000.0};
    const double zero[] = {0.0};
    const double inverted[] = {700.0, 500.0};
    CHECK_THROWS_AS(design_fir(FilterKind::Lowpass, cut, 100, kSr), Error);
    CHECK_THROWS_AS(design_fir(FilterKind::Lowpass, cut, 9, kSr), Error);
    CHECK_THROWS_AS(design_fir(FilterKind::Lowpass, bad, 101, kSr), Error);
    CHECK_THROWS_AS(design_fir(FilterKind::Lowpass, zero, 101, kSr), Error);
    CHECK_THROWS_AS(design_fir(FilterKind::Bandpass, inverted, 101, kSr), Error);
    CHECK_THROWS_AS(design_fir(FilterKind::Bandpass, cut, 101, kSr), Error);
  }

  TEST_CASE("apply_fir") {
    FirFilter impulse;
    impulse.taps.assign(11, 0.0);
    impulse.taps[5] = 1.0;
    const auto s = gen_tone(600, 0.5, 0.1, kSr);
    CHECK(apply_fir(s, impulse) == s);

    const double cut[] = {1000.0};
    const auto lp = design_fir(FilterKind::Lowpass, cut, 101, kSr);
    const auto dc = apply_fir(SampleBuffer(std::vector<double>(2000, 0.7), kSr), lp);
    for (std::size_t i = 100; i < 1900; ++i) REQUIRE(dc[i] == Approx(0.7).epsilon(0.01));

    const auto a = gen_tone(600, 0.5, 1.0, kSr);
    const auto b = gen_tone(3000, 0.5, 1.0, kSr);
    std::vector<double> mix(a.size());
    for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = a[i] + b[i];
    const auto before = stft(SampleBuffer(mix, kSr));
    const auto after = stft(apply_fir(SampleBuffer(mix, kSr), lp));
    const std::size_t k3 = 96;  // 3000 Hz / 31.25 Hz
    const std::size_t f = before.frames() / 2;
    CHECK(20 * std::log10(after.magnitudes(k3, f) / before.magnitudes(k3, f)) <= -40.0);

    CHECK_THROWS_AS(apply_fir(SampleBuffer(std::vector<double>(50, 1.0), kSr), lp), Error);
  }

  TEST_CASE("zscore outliers") {
    std::vector<std::vector<double>> same(10, std::vector<double>{1.0, 2.0});
    CHECK(detect_outliers(table_of(same), OutlierMethod::ZScore, 4.0).flags.empty());
    CHECK(detect_outliers(table_of(same), OutlierMethod::Iqr, 1.5).flags.empty());

    Rng rng(3);
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < 99; ++i) rows.push_back({0.5 + 0.01 * rng.gaussian()});
    rows.push_back({50.0});
    const auto rep = detect_outliers(table_of(rows), OutlierMethod::ZScore, 4.0);
    CHECK(rep.flagged_ids() == std::vector<std::string>{"r99"});
    // by hand: mean 0.995, population std sqrt((99 * 0.495^2 + 49.005^2) / 100) = 4.925, z = 9.95
    CHECK(rep.flags[0].value == Approx(9.95).epsilon(0.01));
    CHECK_THROWS_AS(detect_outliers(table_of({{1.0}, {2.0}, {3.0}}), OutlierMethod::ZScore, 4.0), Error);
  }

  TEST_CASE("iqr outliers") {
    std::vector<std::vector<double>> rows;
    for (int i = 1; i <= 100; ++i) rows.push_back({static_cast<double>(i)});
    rows.push_back({1e6});
    const auto rep = detect_outliers(table_of(rows), OutlierMethod::Iqr, 1.5);
    CHECK(rep.flagged_ids() == std::vector<std::string>{"r100"});
    // 101 values: Q1 = 26, Q3 = 76, fences [-49, 151]
    CHECK(rep.flags[0].lower == Approx(-49.0));
    CHECK(rep.flags[0].upper == Approx(151.0));
    CHECK(quantile_linear({1, 2, 3, 4}, 0.5) == Approx(2.5));
  }

  TEST_CASE("outlier detection is permutation invariant") {
    Rng rng(5);
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < 40; ++i) rows.push_back({rng.gaussian(), rng.uniform()});
    rows[7][0] = 25.0;
    auto t = table_of(rows);
    const auto a = detect_outliers(t, OutlierMethod::ZScore, 3.0);
    std::vector<std::size_t> order(40);
    for (std::size_t i = 0; i < 40; ++i) order[i] = 39 - i;
    FeatureTable p = t;
    for (std::size_t i = 0; i < 40; ++i) {
      p.rows[i] = t.rows[order[i]];
      p.ids[i] = t.ids[order[i]];
    }
    const auto b = detect_outliers(p, OutlierMethod::ZScore, 3.0);
    CHECK(a.flagged_ids() == b.flagged_ids());
    REQUIRE(a.flags.size() == b.flags.size());
    CHECK(a.flags[0].value == b.flags[0].value);
  }

  TEST_CASE("validate_manifest") {
    test::TempDir dir("validate");
    DatasetConfig cfg;
    cfg.classes = {SignalClass::CW, SignalClass::AM};
    cfg.snr_grid = {std::nullopt, 0.0};
    cfg.seed = 3;
    auto records = synth_dataset(cfg, dir.path());
    const auto manifest = dir / "manifest.jsonl";
    CHECK(validate_manifest(manifest, dir.path()).ok());

    std::filesystem::remove(dir.path() / records[1].path);
    auto rep = validate_manifest(manifest, dir.path());
    REQUIRE(rep.violations.size() == 1);
    CHECK(rep.violations[0].kind == "missing_file");
    CHECK(rep.violations[0].id == records[1].id);
    CHECK(rep.to_text().find(records[1].id) != std::string::npos);

    write_raw_f32(render(signal_spec_for(records[1])), dir.path() / records[1].path);
    records[2].binary_label = records[2].binary_label == BinaryLabel::Clean ? BinaryLabel::Noisy : BinaryLabel::Clean;
    write_manifest(manifest, records);
    rep = validate_manifest(manifest, dir.path());
    REQUIRE(rep.violations.size() == 1);
    CHECK(rep.violations[0].kind == "label_mismatch");
    CHECK(rep.violations[0].id == records[2].id);

    try {
      validate_manifest(dir / "nope.jsonl", dir.path());
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Io);
    }
  }

  TEST_CASE("validate_manifest catches duplicates, lengths and malformed lines") {
    test::TempDir dir("validate2");
    DatasetConfig cfg;
    cfg.classes = {SignalClass::FM};
    cfg.count_per_cell = 3;
    auto records = synth_dataset(cfg, dir.path());
    records[2].id = records[0].id;
    records[1].duration_s = 0.5;
    std::string text = manifest_to_jsonl(records) + "{not json}\n";
    write_text_file(dir / "manifest.jsonl", text);
    const auto rep = validate_manifest(dir / "manifest.jsonl", dir.path());
    std::vector<std::string> kinds;
    for (const auto& v : rep.violations) kinds.push_back(v.kind);
    std::sort(kinds.begin(), kinds.end());
    CHECK(kinds == std::vector<std::string>{"duplicate_id", "length_mismatch", "malformed"});
  }
}
