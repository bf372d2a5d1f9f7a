#pragma once

#include <map>
#include <string>
#include <vector>

#include "lmm/dataset.hpp"
#include "lmm/format.hpp"

namespace lmm {

struct RefurbishedEntry {
  Label label = 0;                // MAP label, lowest index on ties
  std::vector<double> posterior;  // sums to 1
  int epoch_assigned = 0;
  friend bool operator==(const RefurbishedEntry&, const RefurbishedEntry&) = default;
};

/// Samples whose labels have been replaced, keyed by sample id. Membership is
/// permanent; the label may be reassigned on later epochs.
class RefurbishedSet {
 public:
  bool contains(SampleId id) const { return entries_.contains(id); }
  const RefurbishedEntry* find(SampleId id) const {
    auto it = entries_.find(id);
    return it == entries_.end() ? nullptr : &it->second;
  }
  void assign(SampleId id, RefurbishedEntry entry) { entries_[id] = std::move(entry); }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  /// Observed labels with refurbished ones substituted.
  std::vector<Label> current_labels(const Dataset& data) const {
    std::vector<Label> out = data.observed_labels();
    for (const auto& [id, e] : entries_) out.at(id) = e.label;
    return out;
  }

  /// sample_id,refurb_label,epoch_assigned,p_0..p_{M-1}
  std::string to_csv(std::size_t num_classes) const {
    std::string out = "sample_id,refurb_label,epoch_assigned";
    for (std::size_t j = 0; j < num_classes; ++j) out += ",p_" + std::to_string(j);
    out += "\n";
    for (const auto& [id, e] : entries_) {
      out += std::to_string(id) + "," + std::to_string(e.label) + "," + std::to_string(e.epoch_assigned);
      for (double p : e.posterior) out += "," + format_double(p);
      out += "\n";
    }
    return out;
  }

  friend bool operator==(const RefurbishedSet&, const RefurbishedSet&) = default;

 private:
  std::map<SampleId, RefurbishedEntry> entries_;
};

}  // namespace lmm
