#include "somd/rebalance.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "somd/error.hpp"
#include "somd/random.hpp"

namespace somd {

ClassFrequencyTable& ClassFrequencyTable::operator+=(const ClassFrequencyTable& other) {
  for (const auto& [k, v] : other.counts) counts[k] += v;
  total += other.total;
  return *this;
}

const char* scaling_mode_name(ScalingMode mode) noexcept {
  return mode == ScalingMode::Rescale ? "rescale" : "clip";
}

ScalingMode parse_scaling_mode(std::string_view name) {
  if (name == "rescale") return ScalingMode::Rescale;
  if (name == "clip") return ScalingMode::Clip;
  throw Error(ErrorCode::InvalidConfig, "unknown weight scaling mode '" + std::string(name) + "'");
}

void WeightScalingConfig::validate() const {
  if (!(w_min > 0.0) || !(w_max > w_min) || !std::isfinite(w_max))
    throw Error(ErrorCode::InvalidConfig, "weight scaling needs w_max > w_min > 0");
}

double ClassWeights::at(const std::string& tag_class) const {
  auto it = weights.find(tag_class);
  return it == weights.end() ? 1.0 : it->second;
}

std::string ClassWeights::to_json() const {
  nlohmann::json j = weights;
  return j.dump(2) + "\n";
}

ClassWeights ClassWeights::from_json(std::string_view text) {
  ClassWeights out;
  try {
    const auto j = nlohmann::json::parse(text);
    if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, "class weights must be a JSON object");
    for (const auto& [k, v] : j.items()) {
      if (!v.is_number() || !(v.get<double>() > 0.0))
        throw Error(ErrorCode::InvalidConfig, "weight for '" + k + "' must be a positive number");
      out.weights[k] = v.get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("class weights: ") + e.what());
  }
  return out;
}

void SamplingConfig::validate() const {
  if (oversample_factor < 1) throw Error(ErrorCode::InvalidConfig, "oversample factor must be >= 1");
  if (!(multiplier > 0.0) || !std::isfinite(multiplier))
    throw Error(ErrorCode::InvalidConfig, "undersample multiplier must be > 0");
}

namespace {

ClassFrequencyTable empty_table(const LabelSet& labels) {
  ClassFrequencyTable table;
  for (const Tag& t : labels.tag_space()) table.counts[t.str()] = 0;
  return table;
}

}  // namespace

ClassFrequencyTable class_frequencies(const Dataset& dataset) {
  ClassFrequencyTable table = empty_table(dataset.labels);
  for (const auto& sentence : dataset.sentences) {
    for (const Tag& t : sentence.tags) ++table.counts[t.str()];
    table.total += sentence.tags.size();
  }
  return table;
}

ClassFrequencyTable class_frequencies(std::span<const AlignedSequence> aligned,
                                      const LabelSet& labels) {
  ClassFrequencyTable table = empty_table(labels);
  for (const auto& seq : aligned) {
    for (const Target& t : seq.targets) {
      if (!t) continue;
      ++table.counts[t->str()];
      ++table.total;
    }
  }
  return table;
}

RawWeights inverse_frequency_weights(const ClassFrequencyTable& freq) {
  RawWeights raw;
  const auto total = static_cast<double>(freq.total);
  for (const auto& [tag_class, count] : freq.counts) {
    if (count > 0) raw[tag_class] = total / static_cast<double>(count);
  }
  if (raw.empty()) throw Error(ErrorCode::AllZeroCounts, "every class count is zero");
  return raw;
}

ClassWeights scale_weights(const RawWeights& raw, const WeightScalingConfig& config,
                           std::span<const std::string> all_classes) {
  config.validate();
  ClassWeights out;
  if (raw.empty()) return out;

  double lo = raw.begin()->second;
  double hi = lo;
  for (const auto& [c, r] : raw) {
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }

  for (const auto& [c, r] : raw) {
    double w;
    if (config.mode == ScalingMode::Clip) {
      w = std::clamp(r, config.w_min, config.w_max);
    } else if (hi == lo || r == lo) {
      w = config.w_min;
    } else if (r == hi) {
      w = config.w_max;  // exact endpoint, no rounding through the affine map
    } else {
      w = config.w_min + (r - lo) / (hi - lo) * (config.w_max - config.w_min);
    }
    out.weights[c] = w;
  }
  for (const auto& c : all_classes) {
    if (!raw.contains(c)) out.weights[c] = config.w_max;
  }
  return out;
}

ClassWeights class_weights(const ClassFrequencyTable& freq, const WeightScalingConfig& config) {
  std::vector<std::string> classes;
  classes.reserve(freq.counts.size());
  for (const auto& [c, n] : freq.counts) classes.push_back(c);
  return scale_weights(inverse_frequency_weights(freq), config, classes);
}

Partition partition_by_mentions(const Dataset& dataset) {
  Partition p;
  for (const auto& sentence : dataset.sentences) {
    (has_mention(sentence) ? p.under : p.over).push_back(sentence);
  }
  return p;
}

std::size_t adaptive_sample_size(std::size_t under, std::size_t over, const SamplingConfig& config) {
  const std::size_t oversampled = config.oversample_factor * under;
  const auto target =
      static_cast<std::size_t>(std::floor(config.multiplier * static_cast<double>(oversampled)));
  return oversampled + std::min(over, target);
}

Dataset adaptive_sample(const Dataset& dataset, const SamplingConfig& config) {
  config.validate();
  Partition parts = partition_by_mentions(dataset);
  const std::size_t oversampled = config.oversample_factor * parts.under.size();
  const std::size_t keep = adaptive_sample_size(parts.under.size(), parts.over.size(), config) - oversampled;

  Rng rng(config.seed);
  Dataset out;
  out.labels = dataset.labels;
  out.sentences.reserve(oversampled + keep);
  for (std::size_t r = 0; r < config.oversample_factor; ++r)
    out.sentences.insert(out.sentences.end(), parts.under.begin(), parts.under.end());
  for (std::size_t idx : sample_without_replacement(parts.over.size(), keep, rng))
    out.sentences.push_back(parts.over[idx]);
  shuffle(out.sentences, rng);
  return out;
}

}  // namespace somd
