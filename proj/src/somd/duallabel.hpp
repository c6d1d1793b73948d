#pragma once

// Dual-classifier label decomposition: composite "{software}_{mention}" tags
// split into a software-type stream and a mention-type stream, and merged
// back after prediction.

#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "somd/corpus.hpp"

namespace somd {

struct CompositeLabel {
  std::string software;
  std::string mention;

  std::string str() const { return software + "_" + mention; }
  friend bool operator==(const CompositeLabel&, const CompositeLabel&) = default;
};

// Throws UnknownLabel when the label is not a catalog composite.
CompositeLabel split_label(std::string_view label, const LabelCatalog& catalog);

enum class MergePolicy { Strict, SoftwarePrecedence };

const char* merge_policy_name(MergePolicy policy) noexcept;
MergePolicy parse_merge_policy(std::string_view name);

/// O -> (O, O); X-S_M -> (X-S, X-M) for X in {B, I}.
std::pair<Tag, Tag> decompose(const Tag& tag, const LabelCatalog& catalog);

/// Strict: composite only when both tags are non-O with the same prefix.
/// SoftwarePrecedence: a non-O software tag always yields a mention, using
/// the catalog's default mention type when the mention tag is O or
/// disagrees on the prefix.
Tag compose(const Tag& software, const Tag& mention, MergePolicy policy,
            const LabelCatalog& catalog);

struct SplitDatasets {
  Dataset software;
  Dataset mention;
};

SplitDatasets split_dataset(const Dataset& dataset, const LabelCatalog& catalog);

/// Position-wise compose followed by IOB2 repair.
std::vector<Tag> merge_predictions(std::span<const Tag> software, std::span<const Tag> mention,
                                   MergePolicy policy, const LabelCatalog& catalog);

// merge_predictions over aligned datasets; tokens must agree.
Dataset merge_datasets(const Dataset& software, const Dataset& mention, MergePolicy policy,
                       const LabelCatalog& catalog);

}  // namespace somd
