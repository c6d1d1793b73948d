#pragma once

// Class-imbalance remediation: inverse-frequency class weights squeezed into
// [w_min, w_max], and sentence-level adaptive over/under-sampling.

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "somd/align.hpp"
#include "somd/corpus.hpp"

namespace somd {

/// Counts per tag class ("O", "B-x", "I-x"), zero entries included for the
/// whole tag space of the label set.
struct ClassFrequencyTable {
  std::map<std::string, std::size_t> counts;
  std::size_t total = 0;

  ClassFrequencyTable& operator+=(const ClassFrequencyTable& other);
  friend bool operator==(const ClassFrequencyTable&, const ClassFrequencyTable&) = default;
};

using RawWeights = std::map<std::string, double>;

enum class ScalingMode { Rescale, Clip };

const char* scaling_mode_name(ScalingMode mode) noexcept;
ScalingMode parse_scaling_mode(std::string_view name);

struct WeightScalingConfig {
  double w_min = 1.0;
  double w_max = 25.0;
  ScalingMode mode = ScalingMode::Rescale;

  void validate() const;
};

// The maximum weights studied for the weighted loss.
inline constexpr double kStudiedWeightCaps[] = {25.0, 50.0, 100.0, 200.0};

struct ClassWeights {
  std::map<std::string, double> weights;

  double at(const std::string& tag_class) const;
  std::string to_json() const;
  static ClassWeights from_json(std::string_view text);
  friend bool operator==(const ClassWeights&, const ClassWeights&) = default;
};

struct SamplingConfig {
  std::size_t oversample_factor = 2;
  double multiplier = 1.5;
  std::uint64_t seed = 0;

  void validate() const;
};

// The undersampling multiples studied.
inline constexpr double kStudiedMultipliers[] = {1.0, 1.5, 3.0};

ClassFrequencyTable class_frequencies(const Dataset& dataset);

/// Piece-level counts over non-IGNORE targets.
ClassFrequencyTable class_frequencies(std::span<const AlignedSequence> aligned,
                                      const LabelSet& labels);

/// total / count(c) for every class with a non-zero count.
RawWeights inverse_frequency_weights(const ClassFrequencyTable& freq);

/// Rescale: affine map of [min raw, max raw] onto [w_min, w_max] (all equal
/// raws give w_min). Clip: clamp to [w_min, w_max]. Every class listed in
/// `all_classes` but absent from `raw` gets w_max.
ClassWeights scale_weights(const RawWeights& raw, const WeightScalingConfig& config,
                           std::span<const std::string> all_classes = {});

// inverse_frequency_weights + scale_weights over the table's classes.
ClassWeights class_weights(const ClassFrequencyTable& freq, const WeightScalingConfig& config);

struct Partition {
  std::vector<TaggedSentence> over;   // all-O sentences
  std::vector<TaggedSentence> under;  // at least one non-O tag
};

Partition partition_by_mentions(const Dataset& dataset);

// factor * |U| + min(|O|, floor(multiplier * factor * |U|))
std::size_t adaptive_sample_size(std::size_t under, std::size_t over, const SamplingConfig& config);

/// Every under-represented sentence repeated `oversample_factor` times plus a
/// draw without replacement of min(|O|, floor(multiplier * factor * |U|))
/// all-O sentences, returned in a seeded shuffle.
Dataset adaptive_sample(const Dataset& dataset, const SamplingConfig& config);

}  // namespace somd
