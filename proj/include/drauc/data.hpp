#pragma once
// Labeled datasets with features in [0,1]^d: synthetic generation, CSV
// ingestion with per-dimension min-max scaling, long-tail subsampling and
// Gaussian corruption.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "drauc/error.hpp"

namespace drauc {

/// Per-dimension (min, max) mapping raw units to [0,1].
struct Scaler {
  std::vector<double> min;
  std::vector<double> max;

  friend bool operator==(const Scaler&, const Scaler&) = default;

  /// Constant columns map to 0.5. Results are clipped to [0,1].
  double apply(std::size_t dim, double raw) const {
    const double lo = min[dim], hi = max[dim];
    if (!(hi > lo)) return 0.5;
    return std::clamp((raw - lo) / (hi - lo), 0.0, 1.0);
  }
};

struct Dataset {
  std::size_t dim = 0;
  std::vector<double> features;  // row-major n x dim
  std::vector<int> labels;
  double p_hat = 0.0;
  Scaler scaler;

  std::size_t size() const { return labels.size(); }

  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(features).subspan(i * dim, dim);
  }
  std::span<double> row(std::size_t i) { return std::span<double>(features).subspan(i * dim, dim); }

  std::size_t count_positive() const {
    return std::size_t(std::count(labels.begin(), labels.end(), 1));
  }

  void refresh_p_hat() { p_hat = labels.empty() ? 0.0 : double(count_positive()) / double(size()); }

  /// Same samples in the same order. The scaler is ingestion metadata and is compared separately.
  bool same_samples(const Dataset& other) const {
    return dim == other.dim && features == other.features && labels == other.labels &&
           p_hat == other.p_hat;
  }
};

/// Builds a dataset from rows; p_hat is derived from the labels.
inline Dataset make_dataset(std::size_t dim, std::vector<double> features, std::vector<int> labels) {
  if (dim == 0) throw ConfigError("dim must be >= 1");
  if (features.size() != dim * labels.size()) throw DimensionError("features are not n x dim");
  for (int y : labels)
    if (y != 0 && y != 1) throw DataError("labels must be 0 or 1");
  Dataset ds;
  ds.dim = dim;
  ds.features = std::move(features);
  ds.labels = std::move(labels);
  ds.scaler.min.assign(dim, 0.0);
  ds.scaler.max.assign(dim, 1.0);
  ds.refresh_p_hat();
  return ds;
}

namespace detail {

inline Scaler fit_scaler(std::size_t dim, std::span<const double> raw) {
  Scaler s;
  s.min.assign(dim, std::numeric_limits<double>::infinity());
  s.max.assign(dim, -std::numeric_limits<double>::infinity());
  for (std::size_t k = 0; k < raw.size(); ++k) {
    const std::size_t j = k % dim;
    s.min[j] = std::min(s.min[j], raw[k]);
    s.max[j] = std::max(s.max[j], raw[k]);
  }
  return s;
}

inline void apply_scaler(const Scaler& s, std::size_t dim, std::vector<double>& values) {
  for (std::size_t k = 0; k < values.size(); ++k) values[k] = s.apply(k % dim, values[k]);
}

inline Dataset subset(const Dataset& ds, std::span<const std::size_t> indices) {
  Dataset out;
  out.dim = ds.dim;
  out.scaler = ds.scaler;
  out.features.reserve(indices.size() * ds.dim);
  out.labels.reserve(indices.size());
  for (std::size_t i : indices) {
    const auto r = ds.row(i);
    out.features.insert(out.features.end(), r.begin(), r.end());
    out.labels.push_back(ds.labels[i]);
  }
  out.refresh_p_hat();
  return out;
}

}  // namespace detail

/// Two isotropic Gaussian blobs centred at mu_pos*1 (first n/2 rows, label 1)
/// and mu_neg*1 (label 0), min-max normalised per dimension.
inline Dataset gen_synthetic(std::size_t n, std::size_t d, double mu_pos = 0.65,
                             double mu_neg = 0.35, double sigma = 0.15, std::uint64_t seed = 0) {
  if (n < 4) throw ConfigError("gen_synthetic needs n >= 4");
  if (d < 1) throw ConfigError("gen_synthetic needs d >= 1");
  if (!(sigma > 0.0)) throw ConfigError("gen_synthetic needs sigma > 0");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  const std::size_t n_pos = n / 2;
  std::vector<double> raw(n * d);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = i < n_pos ? 1 : 0;
    const double mu = labels[i] == 1 ? mu_pos : mu_neg;
    for (std::size_t j = 0; j < d; ++j) raw[i * d + j] = mu + noise(rng);
  }
  Dataset ds;
  ds.dim = d;
  ds.scaler = detail::fit_scaler(d, raw);
  detail::apply_scaler(ds.scaler, d, raw);
  ds.features = std::move(raw);
  ds.labels = std::move(labels);
  ds.refresh_p_hat();
  return ds;
}

/// Drops positives uniformly at random until n+ = floor(ratio * n- / (1 - ratio)).
/// Negatives are untouched; original row order is kept.
inline Dataset make_long_tailed(const Dataset& ds, double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw ConfigError("ratio must lie in (0,1)");
  const std::size_t n_pos = ds.count_positive();
  const std::size_t n_neg = ds.size() - n_pos;
  if (ratio > ds.p_hat) throw DataError("ratio exceeds the current positive fraction");
  // Small slack so that e.g. ratio = 11/110 keeps 11 rather than 10 after rounding.
  const auto keep = std::size_t(std::floor(ratio * double(n_neg) / (1.0 - ratio) + 1e-9));
  if (keep < 1) throw DataError("ratio leaves zero positives");
  std::vector<std::size_t> pos_idx;
  for (std::size_t i = 0; i < ds.size(); ++i)
    if (ds.labels[i] == 1) pos_idx.push_back(i);
  std::vector<char> kept(ds.size(), 1);
  if (keep < n_pos) {
    std::mt19937_64 rng(seed);
    std::shuffle(pos_idx.begin(), pos_idx.end(), rng);
    for (std::size_t k = keep; k < pos_idx.size(); ++k) kept[pos_idx[k]] = 0;
  }
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < ds.size(); ++i)
    if (kept[i]) rows.push_back(i);
  return detail::subset(ds, rows);
}

/// Adds N(0, sigma^2) noise to every feature and clips to [0,1]. Labels untouched.
inline Dataset corrupt(const Dataset& ds, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw ConfigError("corruption sigma must be >= 0");
  Dataset out = ds;
  if (sigma == 0.0) return out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  for (double& v : out.features) v = std::clamp(v + noise(rng), 0.0, 1.0);
  return out;
}

/// Random partition into (first, second) with round(fraction * n) rows in the first part.
/// Row order within each part follows the original order.
inline std::pair<Dataset, Dataset> split(const Dataset& ds, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw ConfigError("split fraction must lie in (0,1)");
  std::vector<std::size_t> idx(ds.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  const auto n_first = std::size_t(std::llround(fraction * double(ds.size())));
  std::vector<std::size_t> first(idx.begin(), idx.begin() + std::ptrdiff_t(n_first));
  std::vector<std::size_t> second(idx.begin() + std::ptrdiff_t(n_first), idx.end());
  std::sort(first.begin(), first.end());
  std::sort(second.begin(), second.end());
  return {detail::subset(ds, first), detail::subset(ds, second)};
}

// ---------------------------------------------------------------------------
// CSV: header "y,x1,...,xd", LF line endings, no quoting.

namespace detail {

inline std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

inline bool parse_double(const std::string& text, double& out) {
  if (text.empty()) return false;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct RawCsv {
  std::size_t dim = 0;
  std::vector<double> values;
  std::vector<int> labels;
};

inline RawCsv read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  RawCsv csv;
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError(1, "missing header");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_fields(line);
  if (header.size() < 2 || header[0] != "y") throw ParseError(1, "header must be y,x1,...,xd");
  for (std::size_t j = 1; j < header.size(); ++j)
    if (header[j] != "x" + std::to_string(j))
      throw ParseError(1, "header column " + std::to_string(j + 1) + " must be x" +
                              std::to_string(j));
  csv.dim = header.size() - 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != csv.dim + 1)
      throw ParseError(line_no, "ragged row: expected " + std::to_string(csv.dim + 1) +
                                    " fields, got " + std::to_string(fields.size()));
    if (fields[0] != "0" && fields[0] != "1")
      throw ParseError(line_no, "label must be 0 or 1, got '" + fields[0] + "'");
    csv.labels.push_back(fields[0] == "1" ? 1 : 0);
    for (std::size_t j = 1; j < fields.size(); ++j) {
      double v = 0.0;
      if (!parse_double(fields[j], v))
        throw ParseError(line_no, "non-numeric field '" + fields[j] + "'");
      csv.values.push_back(v);
    }
  }
  if (csv.labels.empty()) throw ParseError(line_no, "no data rows");
  return csv;
}

}  // namespace detail

/// Loads a CSV and min-max normalises each column over the file itself. Columns already
/// inside [0,1] are taken as normalised (identity scaler), so loading a saved dataset is a
/// no-op even when its rows no longer span the full range (e.g. after long-tailing).
inline Dataset load_csv(const std::string& path) {
  auto csv = detail::read_csv(path);
  Dataset ds;
  ds.dim = csv.dim;
  ds.scaler = detail::fit_scaler(csv.dim, csv.values);
  for (std::size_t j = 0; j < csv.dim; ++j)
    if (ds.scaler.min[j] >= 0.0 && ds.scaler.max[j] <= 1.0) {
      ds.scaler.min[j] = 0.0;
      ds.scaler.max[j] = 1.0;
    }
  detail::apply_scaler(ds.scaler, csv.dim, csv.values);
  ds.features = std::move(csv.values);
  ds.labels = std::move(csv.labels);
  ds.refresh_p_hat();
  return ds;
}

/// Loads a CSV using a previously fitted scaler (e.g. the training scaler).
inline Dataset load_csv(const std::string& path, const Scaler& scaler) {
  auto csv = detail::read_csv(path);
  if (scaler.min.size() != csv.dim || scaler.max.size() != csv.dim)
    throw DimensionError("scaler dimension does not match CSV columns");
  Dataset ds;
  ds.dim = csv.dim;
  ds.scaler = scaler;
  detail::apply_scaler(scaler, csv.dim, csv.values);
  ds.features = std::move(csv.values);
  ds.labels = std::move(csv.labels);
  ds.refresh_p_hat();
  return ds;
}

inline void save_csv(const Dataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << 'y';
  for (std::size_t j = 1; j <= ds.dim; ++j) out << ",x" << j;
  out << '\n';
  for (std::size_t i = 0; i < ds.size(); ++i) {
    out << ds.labels[i];
    for (double v : ds.row(i)) out << ',' << detail::format_double(v);
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace drauc
