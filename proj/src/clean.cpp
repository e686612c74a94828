#include "hamnet/clean.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "hamnet/dataset.hpp"
#include "hamnet/error.hpp"

namespace hamnet {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view to_string(FilterKind kind) noexcept {
  switch (kind) {
    case FilterKind::Lowpass: return "lowpass";
    case FilterKind::Highpass: return "highpass";
    case FilterKind::Bandpass: return "bandpass";
  }
  return "lowpass";
}

FilterKind parse_filter_kind(std::string_view name) {
  for (auto k : {FilterKind::Lowpass, FilterKind::Highpass, FilterKind::Bandpass}) {
    if (name == to_string(k)) return k;
  }
  fail(ErrorKind::Config, "unknown filter kind '" + std::string(name) + "'");
}

namespace {

std::vector<double> windowed_sinc_lowpass(double cutoff_hz, std::size_t n_taps, int sample_rate) {
  const double fc = cutoff_hz / sample_rate;  // cycles per sample
  const double mid = 0.5 * static_cast<double>(n_taps - 1);
  std::vector<double> h(n_taps);
  for (std::size_t i = 0; i < n_taps; ++i) {
    const double x = static_cast<double>(i) - mid;
    const double sinc = x == 0.0 ? 2.0 * fc : std::sin(2.0 * std::numbers::pi * fc * x) / (std::numbers::pi * x);
    const double hamming = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / (n_taps - 1));
    h[i] = sinc * hamming;
  }
  double sum = 0.0;
  for (double v : h) sum += v;
  for (double& v : h) v /= sum;
  return h;
}

double gain_at(const std::vector<double>& h, double freq_hz, int sample_rate) {
  double re = 0.0, im = 0.0;
  const double w = 2.0 * std::numbers::pi * freq_hz / sample_rate;
  for (std::size_t i = 0; i < h.size(); ++i) {
    re += h[i] * std::cos(w * static_cast<double>(i));
    im -= h[i] * std::sin(w * static_cast<double>(i));
  }
  return std::hypot(re, im);
}

// Mirror-average so the taps are exactly symmetric despite rounding.
void symmetrize(std::vector<double>& h) {
  for (std::size_t i = 0, j = h.size() - 1; i < j; ++i, --j) {
    const double avg = 0.5 * (h[i] + h[j]);
    h[i] = h[j] = avg;
  }
}

}  // namespace

FirFilter design_fir(FilterKind kind, std::span<const double> cutoffs_hz, std::size_t n_taps, int sample_rate) {
  require(sample_rate > 0, "sample_rate must be positive");
  require(n_taps >= 11 && n_taps % 2 == 1, "n_taps must be odd and at least 11, got " + std::to_string(n_taps));
  const std::size_t expected = kind == FilterKind::Bandpass ? 2 : 1;
  require(cutoffs_hz.size() == expected, std::string(to_string(kind)) + " needs " + std::to_string(expected) +
                                             " cutoff(s)");
  const double ny = 0.5 * sample_rate;
  for (double c : cutoffs_hz) {
    require(c > 0.0 && c < ny, "cutoff " + std::to_string(c) + " Hz must lie strictly inside (0, " +
                                   std::to_string(ny) + ") Hz");
  }

  FirFilter f;
  f.kind = kind;
  f.cutoffs_hz.assign(cutoffs_hz.begin(), cutoffs_hz.end());
  f.sample_rate = sample_rate;
  switch (kind) {
    case FilterKind::Lowpass:
      f.taps = windowed_sinc_lowpass(cutoffs_hz[0], n_taps, sample_rate);
      break;
    case FilterKind::Highpass: {
      f.taps = windowed_sinc_lowpass(cutoffs_hz[0], n_taps, sample_rate);
      for (double& v : f.taps) v = -v;
      f.taps[n_taps / 2] += 1.0;
      break;
    }
    case FilterKind::Bandpass: {
      require(cutoffs_hz[0] < cutoffs_hz[1], "bandpass cutoffs must be increasing");
      const auto hi = windowed_sinc_lowpass(cutoffs_hz[1], n_taps, sample_rate);
      const auto lo = windowed_sinc_lowpass(cutoffs_hz[0], n_taps, sample_rate);
      f.taps.resize(n_taps);
      for (std::size_t i = 0; i < n_taps; ++i) f.taps[i] = hi[i] - lo[i];
      const double g = gain_at(f.taps, 0.5 * (cutoffs_hz[0] + cutoffs_hz[1]), sample_rate);
      require(g > 1e-6, "bandpass too narrow for the tap count");
      for (double& v : f.taps) v /= g;
      break;
    }
  }
  symmetrize(f.taps);
  return f;
}

SampleBuffer apply_fir(const SampleBuffer& buf, const FirFilter& filter) {
  const std::size_t m = filter.taps.size();
  require(m % 2 == 1, "FIR filter must have an odd tap count");
  if (buf.size() < m) {
    fail(ErrorKind::Parameter, "buffer of " + std::to_string(buf.size()) + " samples is shorter than the " +
                                   std::to_string(m) + "-tap filter");
  }
  const auto x = buf.samples();
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  const auto delay = static_cast<std::ptrdiff_t>(m / 2);
  std::vector<double> y(x.size(), 0.0);
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(m); ++k) {
      const std::ptrdiff_t j = i + delay - k;
      if (j >= 0 && j < n) acc += filter.taps[static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(j)];
    }
    y[static_cast<std::size_t>(i)] = acc;
  }
  return SampleBuffer(std::move(y), buf.sample_rate());
}

// ---- outliers ---------------------------------------------------------------

std::string_view to_string(OutlierMethod m) noexcept { return m == OutlierMethod::ZScore ? "zscore" : "iqr"; }

OutlierMethod parse_outlier_method(std::string_view name) {
  if (name == "zscore") return OutlierMethod::ZScore;
  if (name == "iqr") return OutlierMethod::Iqr;
  fail(ErrorKind::Config, "unknown outlier method '" + std::string(name) + "' (expected zscore or iqr)");
}

double default_outlier_threshold(OutlierMethod m) noexcept { return m == OutlierMethod::ZScore ? 4.0 : 1.5; }

FeatureTable make_feature_table(const std::vector<std::string>& ids, const std::vector<FeatureVector>& features) {
  require(ids.size() == features.size(), "feature table ids and rows differ in length");
  FeatureTable t;
  t.ids = ids;
  for (std::size_t r = 0; r < features.size(); ++r) {
    const auto scalars = features[r].scalars();
    if (r == 0) {
      for (const auto& [name, v] : scalars) t.feature_names.push_back(name);
    }
    require(scalars.size() == t.feature_names.size(), "feature vectors have inconsistent layouts");
    std::vector<double> row;
    for (const auto& [name, v] : scalars) row.push_back(v);
    t.rows.push_back(std::move(row));
  }
  return t;
}

double quantile_linear(std::vector<double> values, double q) {
  require(!values.empty(), "quantile of an empty set");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::vector<std::string> OutlierReport::flagged_ids() const {
  std::set<std::string> ids;
  for (const auto& f : flags) ids.insert(f.id);
  return {ids.begin(), ids.end()};
}

ordered_json OutlierReport::to_json() const {
  ordered_json j;
  j["method"] = std::string(to_string(method));
  j["threshold"] = threshold;
  j["flagged_ids"] = flagged_ids();
  j["flags"] = ordered_json::array();
  for (const auto& f : flags) {
    j["flags"].push_back({{"id", f.id}, {"feature", f.feature}, {"value", f.value}, {"lower", f.lower}, {"upper", f.upper}});
  }
  return j;
}

OutlierReport detect_outliers(const FeatureTable& table, OutlierMethod method, double threshold) {
  const std::size_t n = table.rows.size();
  if (n < 4) fail(ErrorKind::Validation, "outlier detection needs at least 4 records, got " + std::to_string(n));
  require(table.ids.size() == n, "feature table ids and rows differ in length");
  require(threshold > 0.0, "outlier threshold must be positive");
  OutlierReport report{method, threshold, {}};
  const std::size_t n_feat = table.feature_names.size();

  for (std::size_t f = 0; f < n_feat; ++f) {
    std::vector<double> column(n);
    for (std::size_t r = 0; r < n; ++r) {
      require(table.rows[r].size() == n_feat, "feature table row has the wrong width");
      column[r] = table.rows[r][f];
    }
    // sorted accumulation keeps the statistics independent of record order
    std::vector<double> sorted = column;
    std::sort(sorted.begin(), sorted.end());

    if (method == OutlierMethod::ZScore) {
      double mean = 0.0;
      for (double v : sorted) mean += v;
      mean /= static_cast<double>(n);
      std::vector<double> sq(n);
      for (std::size_t i = 0; i < n; ++i) sq[i] = (sorted[i] - mean) * (sorted[i] - mean);
      std::sort(sq.begin(), sq.end());
      double var = 0.0;
      for (double v : sq) var += v;
      const double sd = std::sqrt(var / static_cast<double>(n));
      if (sd < 1e-12) continue;
      for (std::size_t r = 0; r < n; ++r) {
        const double z = (column[r] - mean) / sd;
        if (std::abs(z) > threshold) {
          report.flags.push_back({r, table.ids[r], table.feature_names[f], z, -threshold, threshold});
        }
      }
    } else {
      const double q1 = quantile_linear(sorted, 0.25);
      const double q3 = quantile_linear(sorted, 0.75);
      const double iqr = q3 - q1;
      const double lower = q1 - threshold * iqr;
      const double upper = q3 + threshold * iqr;
      for (std::size_t r = 0; r < n; ++r) {
        if (column[r] < lower || column[r] > upper) {
          report.flags.push_back({r, table.ids[r], table.feature_names[f], column[r], lower, upper});
        }
      }
    }
  }
  return report;
}

// ---- manifest validation ------------------------------------------------------

ordered_json ValidationReport::to_json() const {
  ordered_json j;
  j["records_checked"] = records_checked;
  j["ok"] = ok();
  j["violations"] = ordered_json::array();
  for (const auto& v : violations) {
    j["violations"].push_back({{"line", v.line}, {"id", v.id}, {"kind", v.kind}, {"message", v.message}});
  }
  return j;
}

std::string ValidationReport::to_text() const {
  std::ostringstream os;
  os << "checked " << records_checked << " record(s), " << violations.size() << " violation(s)\n";
  for (const auto& v : violations) {
    os << "  line " << v.line << " [" << v.kind << "] " << (v.id.empty() ? "<no id>" : v.id) << ": " << v.message
       << "\n";
  }
  return os.str();
}

ValidationReport validate_manifest(const std::filesystem::path& manifest, const std::filesystem::path& data_root) {
  std::ifstream in(manifest);
  if (!in) fail(ErrorKind::Io, "cannot open manifest '" + manifest.string() + "'");

  ValidationReport report;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    ++report.records_checked;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      report.violations.push_back({line_no, "", "malformed", e.what()});
      continue;
    }
    const std::string id = j.is_object() && j.contains("id") && j["id"].is_string() ? j["id"].get<std::string>() : "";
    if (j.is_object() && j.contains("binary_label")) {
      const auto& lbl = j["binary_label"];
      if (!lbl.is_null() && !(lbl.is_string() && (lbl == "clean" || lbl == "noisy"))) {
        report.violations.push_back({line_no, id, "invalid_label", "binary_label " + lbl.dump() +
                                                                      " is not \"clean\", \"noisy\" or null"});
        continue;
      }
    }
    DatasetRecord r;
    try {
      r = record_from_json(j);
    } catch (const Error& e) {
      report.violations.push_back({line_no, id, "malformed", e.what()});
      continue;
    }
    if (!seen.insert(r.id).second) {
      report.violations.push_back({line_no, r.id, "duplicate_id", "id '" + r.id + "' appears more than once"});
    }
    if (r.binary_label != binary_label_for(r.snr_db)) {
      const auto expected = binary_label_for(r.snr_db);
      report.violations.push_back(
          {line_no, r.id, "label_mismatch",
           "binary_label " + (r.binary_label ? to_string(*r.binary_label) : std::string("null")) +
               " disagrees with snr_db (expected " + (expected ? to_string(*expected) : std::string("null")) + ")"});
    }
    const auto path = data_root / r.path;
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec)) {
      report.violations.push_back({line_no, r.id, "missing_file", "signal file '" + path.string() + "' not found"});
      continue;
    }
    const auto size = std::filesystem::file_size(path, ec);
    const auto expected_bytes = 4 * r.expected_samples();
    if (ec || size != expected_bytes) {
      report.violations.push_back({line_no, r.id, "length_mismatch",
                                   "signal file has " + std::to_string(size) + " bytes, expected " +
                                       std::to_string(expected_bytes)});
    }
  }
  if (in.bad()) fail(ErrorKind::Io, "read error on manifest '" + manifest.string() + "'");
  return report;
}

}  // namespace hamnet
