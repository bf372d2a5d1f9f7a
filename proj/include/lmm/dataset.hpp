#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lmm/error.hpp"
#include "lmm/format.hpp"
#include "lmm/rng.hpp"

namespace lmm {

using Label = std::size_t;
using SampleId = std::size_t;

struct LabelSpace {
  std::size_t num_classes = 2;
  std::vector<std::string> class_names;  // empty or exactly num_classes entries

  void validate() const {
    if (num_classes < 2) throw DataError("label space needs at least 2 classes");
    if (!class_names.empty() && class_names.size() != num_classes)
      throw DataError("class_names must have one entry per class");
  }
  bool contains(Label y) const noexcept { return y < num_classes; }
  friend bool operator==(const LabelSpace&, const LabelSpace&) = default;
};

struct Sample {
  SampleId id = 0;
  std::vector<double> features;
  Label observed_label = 0;
  std::optional<Label> truth_label;  // audit only, never read by training
  friend bool operator==(const Sample&, const Sample&) = default;
};

/// Immutable, densely indexed collection of samples sharing one label space.
class Dataset {
 public:
  Dataset() = default;

  Dataset(std::vector<Sample> samples, LabelSpace labels, std::size_t feature_dim)
      : samples_(std::move(samples)), labels_(std::move(labels)), feature_dim_(feature_dim) {
    labels_.validate();
    for (std::size_t i = 0; i < samples_.size(); ++i) {
      const Sample& s = samples_[i];
      if (s.id != i) throw DataError("sample ids must be dense 0..N-1 (sample " + std::to_string(i) + ")");
      if (s.features.size() != feature_dim_)
        throw DataError("sample " + std::to_string(i) + " has " + std::to_string(s.features.size()) +
                        " features, expected " + std::to_string(feature_dim_));
      if (!labels_.contains(s.observed_label)) throw DataError("sample " + std::to_string(i) + " label out of range");
      if (s.truth_label && !labels_.contains(*s.truth_label))
        throw DataError("sample " + std::to_string(i) + " truth label out of range");
    }
  }

  std::span<const Sample> samples() const noexcept { return samples_; }
  const Sample& operator[](SampleId id) const { return samples_.at(id); }
  std::size_t size() const noexcept { return samples_.size(); }
  bool empty() const noexcept { return samples_.empty(); }
  const LabelSpace& label_space() const noexcept { return labels_; }
  std::size_t num_classes() const noexcept { return labels_.num_classes; }
  std::size_t feature_dim() const noexcept { return feature_dim_; }

  bool has_truth() const noexcept {
    return !samples_.empty() &&
           std::all_of(samples_.begin(), samples_.end(), [](const Sample& s) { return s.truth_label.has_value(); });
  }

  std::vector<Label> observed_labels() const {
    std::vector<Label> out;
    out.reserve(samples_.size());
    for (const Sample& s : samples_) out.push_back(s.observed_label);
    return out;
  }

  std::vector<Label> truth_labels() const {
    if (!has_truth()) throw DataError("dataset has no ground-truth labels");
    std::vector<Label> out;
    out.reserve(samples_.size());
    for (const Sample& s : samples_) out.push_back(*s.truth_label);
    return out;
  }

  /// New dataset holding the given samples, re-indexed 0..k-1 in the given order.
  Dataset subset(std::span<const SampleId> ids) const {
    std::vector<Sample> out;
    out.reserve(ids.size());
    for (SampleId id : ids) {
      Sample s = samples_.at(id);
      s.id = out.size();
      out.push_back(std::move(s));
    }
    return Dataset(std::move(out), labels_, feature_dim_);
  }

  /// Copy with observed labels replaced.
  Dataset with_observed_labels(std::span<const Label> labels) const {
    if (labels.size() != samples_.size()) throw DataError("label vector length does not match dataset");
    std::vector<Sample> out = samples_;
    for (std::size_t i = 0; i < out.size(); ++i) out[i].observed_label = labels[i];
    return Dataset(std::move(out), labels_, feature_dim_);
  }

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  std::vector<Sample> samples_;
  LabelSpace labels_;
  std::size_t feature_dim_ = 0;
};

// ---------------------------------------------------------------------------
// CSV

struct CsvSchema {
  std::string label_column = "label";
  std::string truth_column = "truth_label";
  /// Explicit feature columns; empty means every other column, in file order.
  std::vector<std::string> feature_columns;
  /// Number of classes; inferred as max(2, max label + 1) when unset.
  std::optional<std::size_t> num_classes;
};

namespace detail {

inline Label parse_label(std::string_view text, std::size_t line, const char* what) {
  long long v = 0;
  if (!parse_int(trim(text), v) || v < 0)
    throw DataError("line " + std::to_string(line) + ": " + what + " '" + std::string(text) + "' is not a class index");
  return static_cast<Label>(v);
}

}  // namespace detail

inline Dataset parse_csv(std::string_view text, const CsvSchema& schema = {}) {
  std::vector<std::string_view> lines;
  for (std::size_t start = 0; start < text.size();) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    lines.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty()) throw DataError("CSV has no header row");

  const auto header = split_fields(lines.front());
  std::optional<std::size_t> label_col, truth_col;
  std::map<std::string, std::size_t, std::less<>> by_name;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string name(trim(header[c]));
    if (!by_name.emplace(name, c).second) throw DataError("duplicate CSV column '" + name + "'");
    if (name == schema.label_column) label_col = c;
    if (name == schema.truth_column) truth_col = c;
  }
  if (!label_col) throw DataError("CSV has no '" + schema.label_column + "' column");

  std::vector<std::size_t> feature_cols;
  if (schema.feature_columns.empty()) {
    for (std::size_t c = 0; c < header.size(); ++c)
      if (c != *label_col && (!truth_col || c != *truth_col)) feature_cols.push_back(c);
  } else {
    for (const auto& name : schema.feature_columns) {
      auto it = by_name.find(name);
      if (it == by_name.end()) throw DataError("CSV has no feature column '" + name + "'");
      feature_cols.push_back(it->second);
    }
  }

  std::vector<Sample> samples;
  samples.reserve(lines.size() - 1);
  Label max_label = 0;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const std::size_t line_no = r + 1;
    const auto fields = split_fields(lines[r]);
    if (fields.size() != header.size())
      throw DataError("line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                      " fields, found " + std::to_string(fields.size()));
    Sample s;
    s.id = samples.size();
    s.features.reserve(feature_cols.size());
    for (std::size_t c : feature_cols) {
      double v = 0.0;
      if (!parse_double(trim(fields[c]), v) || !std::isfinite(v))
        throw DataError("line " + std::to_string(line_no) + ": bad feature value '" + std::string(fields[c]) + "'");
      s.features.push_back(v);
    }
    s.observed_label = detail::parse_label(fields[*label_col], line_no, "label");
    max_label = std::max(max_label, s.observed_label);
    if (truth_col && !trim(fields[*truth_col]).empty()) {
      s.truth_label = detail::parse_label(fields[*truth_col], line_no, "truth label");
      max_label = std::max(max_label, *s.truth_label);
    }
    if (schema.num_classes) {
      if (s.observed_label >= *schema.num_classes)
        throw DataError("line " + std::to_string(line_no) + ": label " + std::to_string(s.observed_label) +
                        " out of range for " + std::to_string(*schema.num_classes) + " classes");
      if (s.truth_label && *s.truth_label >= *schema.num_classes)
        throw DataError("line " + std::to_string(line_no) + ": truth label out of range");
    }
    samples.push_back(std::move(s));
  }

  LabelSpace labels;
  labels.num_classes = schema.num_classes.value_or(std::max<std::size_t>(2, max_label + 1));
  return Dataset(std::move(samples), std::move(labels), feature_cols.size());
}

inline Dataset load_csv(const std::filesystem::path& path, const CsvSchema& schema = {}) {
  if (!std::filesystem::exists(path)) throw DataError("no such file: " + path.string());
  return parse_csv(read_file(path), schema);
}

/// Header f0..f{d-1},label[,truth_label]; features at round-trip precision.
inline std::string to_csv(const Dataset& data) {
  const bool truth = data.has_truth();
  std::string out;
  for (std::size_t f = 0; f < data.feature_dim(); ++f) out += "f" + std::to_string(f) + ",";
  out += truth ? "label,truth_label\n" : "label\n";
  for (const Sample& s : data.samples()) {
    for (double v : s.features) out += format_double(v) + ",";
    out += std::to_string(s.observed_label);
    if (truth) out += "," + std::to_string(*s.truth_label);
    out += "\n";
  }
  return out;
}

inline void save_csv(const Dataset& data, const std::filesystem::path& path) { write_file_atomic(path, to_csv(data)); }

// ---------------------------------------------------------------------------
// Synthetic data

struct GaussianMixtureSpec {
  std::vector<std::vector<double>> means;  // one mean vector per class
  double sigma = 1.0;                      // shared isotropic standard deviation

  /// Two classes at (-offset, 0) and (+offset, 0).
  static GaussianMixtureSpec two_class(double offset = 2.0, double sigma = 1.0) {
    return {{{-offset, 0.0}, {offset, 0.0}}, sigma};
  }

  /// `classes` means evenly spaced on a circle of the given radius.
  static GaussianMixtureSpec polygon(std::size_t classes, double radius, double sigma = 1.0) {
    GaussianMixtureSpec spec{{}, sigma};
    for (std::size_t k = 0; k < classes; ++k) {
      const double a = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(classes);
      spec.means.push_back({radius * std::cos(a), radius * std::sin(a)});
    }
    return spec;
  }
};

/// Balanced Gaussian classes with clean labels; samples interleave classes 0,1,..,M-1,0,1,...
inline Dataset synth_gaussians(const GaussianMixtureSpec& spec, std::size_t n_per_class, std::uint64_t seed) {
  if (spec.means.size() < 2) throw DataError("synthetic spec needs at least 2 classes");
  if (n_per_class < 1) throw DataError("n_per_class must be >= 1");
  if (!(spec.sigma > 0.0)) throw DataError("synthetic sigma must be > 0");
  const std::size_t dim = spec.means.front().size();
  if (dim == 0) throw DataError("synthetic means must have at least one dimension");
  for (const auto& m : spec.means)
    if (m.size() != dim) throw DataError("synthetic means have inconsistent dimensionality");

  Rng rng = Rng(seed).split(stream::synth);
  const std::size_t classes = spec.means.size();
  std::vector<Sample> samples;
  samples.reserve(classes * n_per_class);
  for (std::size_t i = 0; i < n_per_class; ++i) {
    for (Label c = 0; c < classes; ++c) {
      Sample s;
      s.id = samples.size();
      s.features.resize(dim);
      for (std::size_t d = 0; d < dim; ++d) s.features[d] = spec.means[c][d] + spec.sigma * rng.normal();
      s.observed_label = c;
      s.truth_label = c;
      samples.push_back(std::move(s));
    }
  }
  return Dataset(std::move(samples), LabelSpace{classes, {}}, dim);
}

// ---------------------------------------------------------------------------
// Splitting

struct SplitSpec {
  double train_fraction = 0.8;
  double val_fraction = 0.1;
  double test_fraction = 0.1;
  std::uint64_t seed = 0;

  void validate() const {
    for (double f : {train_fraction, val_fraction, test_fraction})
      if (!(f > 0.0 && f < 1.0)) throw DataError("split fractions must lie in (0, 1)");
    if (std::abs(train_fraction + val_fraction + test_fraction - 1.0) > 1e-9)
      throw DataError("split fractions must sum to 1");
  }
};

struct SplitResult {
  Dataset train, val, test;
  // Source ids of each part, ascending.
  std::vector<SampleId> train_ids, val_ids, test_ids;
};

namespace detail {

// Largest-remainder apportionment of n items over the three fractions.
inline std::array<std::size_t, 3> apportion(std::size_t n, const SplitSpec& spec) {
  const std::array<double, 3> f{spec.train_fraction, spec.val_fraction, spec.test_fraction};
  std::array<std::size_t, 3> counts{};
  std::array<double, 3> rem{};
  std::size_t used = 0;
  for (int k = 0; k < 3; ++k) {
    const double exact = f[k] * static_cast<double>(n);
    // Nudge so 0.6*10 = 5.999... floors to 6.
    counts[k] = static_cast<std::size_t>(std::floor(exact + 1e-9));
    rem[k] = exact - static_cast<double>(counts[k]);
    used += counts[k];
  }
  while (used < n) {
    int best = 0;
    for (int k = 1; k < 3; ++k)
      if (rem[k] > rem[best] + 1e-12) best = k;
    ++counts[best];
    rem[best] = -1.0;
    ++used;
  }
  while (used > n) {
    int k = 0;
    while (counts[k] == 0) ++k;
    --counts[k];
    --used;
  }
  return counts;
}

}  // namespace detail

/// Disjoint train/val/test partition; stratified by observed label when every
/// present class has at least three samples.
inline SplitResult split(const Dataset& data, const SplitSpec& spec) {
  spec.validate();
  if (data.size() < 3) throw DataError("split needs at least 3 samples");

  std::vector<std::vector<SampleId>> by_class(data.num_classes());
  for (const Sample& s : data.samples()) by_class[s.observed_label].push_back(s.id);
  const bool stratify = std::all_of(by_class.begin(), by_class.end(),
                                    [](const auto& ids) { return ids.empty() || ids.size() >= 3; });

  std::vector<std::vector<SampleId>> groups;
  if (stratify) {
    for (auto& ids : by_class)
      if (!ids.empty()) groups.push_back(std::move(ids));
  } else {
    std::vector<SampleId> all(data.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    groups.push_back(std::move(all));
  }

  Rng rng = Rng(spec.seed).split(stream::split);
  SplitResult result;
  for (auto& group : groups) {
    rng.shuffle(std::span<SampleId>(group));
    const auto counts = detail::apportion(group.size(), spec);
    auto it = group.begin();
    result.train_ids.insert(result.train_ids.end(), it, it + counts[0]);
    it += counts[0];
    result.val_ids.insert(result.val_ids.end(), it, it + counts[1]);
    it += counts[1];
    result.test_ids.insert(result.test_ids.end(), it, group.end());
  }
  for (auto* ids : {&result.train_ids, &result.val_ids, &result.test_ids}) {
    if (ids->empty()) throw DataError("split produced an empty partition; dataset too small for the fractions");
    std::sort(ids->begin(), ids->end());
  }
  result.train = data.subset(result.train_ids);
  result.val = data.subset(result.val_ids);
  result.test = data.subset(result.test_ids);
  return result;
}

}  // namespace lmm
