#pragma once

// Desk-scale token classifier: a linear model over hashed sparse context
// features, trained by mini-batch SGD on class-weighted cross-entropy.
// Supervision is either word-level or piece-level through one of the label
// alignment strategies.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "somd/align.hpp"
#include "somd/corpus.hpp"
#include "somd/rebalance.hpp"

namespace somd {

/// Feature ids are the low kFeatureBits bits of the 64-bit FNV-1a hash of
/// the feature string.
inline constexpr unsigned kFeatureBits = 20;
inline constexpr std::uint32_t kFeatureMask = (1u << kFeatureBits) - 1;

std::uint32_t hash_feature(std::string_view feature) noexcept;

struct FeatureVector {
  std::vector<std::uint32_t> ids;  // sorted, unique; every value is 1

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

/// Feature strings for one position: lowercased identity, character shape,
/// 3-char prefix and suffix, lowercased neighbours within `window` marked by
/// relative offset (<s> / </s> past the edges), and BOS / EOS flags.
std::vector<std::string> feature_strings(std::span<const std::string> tokens,
                                         std::size_t position, std::size_t window);
FeatureVector extract_features(std::span<const std::string> tokens, std::size_t position,
                               std::size_t window);

// Uppercase -> X, lowercase -> x, digit -> d, other bytes kept.
std::string word_shape(std::string_view token);

/// Rows of `width` doubles keyed by feature id, stored contiguously.
class SparseRows {
 public:
  explicit SparseRows(std::size_t width = 0) : width_(width) {}

  std::size_t width() const noexcept { return width_; }
  std::size_t size() const noexcept { return index_.size(); }

  const double* find(std::uint32_t id) const;
  double* find(std::uint32_t id);
  double* get_or_create(std::uint32_t id);

  std::vector<std::uint32_t> sorted_ids() const;

  friend bool operator==(const SparseRows& a, const SparseRows& b);

 private:
  std::size_t width_;
  std::unordered_map<std::uint32_t, std::size_t> index_;
  std::vector<double> data_;
};

struct ModelParams {
  std::vector<std::string> classes;  // tag strings in tag-space order
  SparseRows weights;
  std::vector<double> bias;

  ModelParams() = default;
  explicit ModelParams(std::vector<std::string> class_names);

  std::size_t num_classes() const noexcept { return classes.size(); }
  std::vector<double> scores(const FeatureVector& features) const;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

struct Example {
  FeatureVector features;
  std::optional<std::size_t> target;  // class index; nullopt = IGNORE
};

struct Gradient {
  SparseRows weights;
  std::vector<double> bias;
};

struct LossAndGradient {
  double loss = 0.0;
  Gradient gradient;
};

std::vector<double> softmax(std::span<const double> scores);

/// Weighted mean cross-entropy
///   L = sum_i w(y_i) * -log softmax(s_i)[y_i] / sum_i w(y_i)
/// over the non-IGNORE examples, with its gradient. `class_weights` holds
/// one weight per class index, or is empty for uniform weights.
LossAndGradient loss_and_gradient(const ModelParams& params, std::span<const Example> batch,
                                  std::span<const double> class_weights);

enum class Supervision { Word, Unified, Selective };

const char* supervision_name(Supervision s) noexcept;
Supervision parse_supervision(std::string_view name);

struct TrainConfig {
  std::size_t epochs = 4;
  double learning_rate = 2e-4;
  std::uint64_t seed = 0;
  std::optional<ClassWeights> class_weights;
  double l2 = 0.0;
  std::size_t context_window = 2;
  std::size_t batch_size = 8;  // sentences per update
  Supervision supervision = Supervision::Selective;
  std::size_t chunk = 4;
  bool unified_bi_conversion = false;

  void validate() const;
};

/// A trained tagger together with everything needed to decode with it.
struct Model {
  LabelSet labels;
  TrainConfig config;
  ModelParams params;

  std::string to_json() const;
  static Model from_json(std::string_view text);
  void save(const std::filesystem::path& path) const;
  static Model load(const std::filesystem::path& path);
};

inline constexpr int kModelFormatVersion = 1;

/// Per-sentence training examples at the configured supervision level.
std::vector<std::vector<Example>> build_examples(const Dataset& dataset, const TrainConfig& config);

// Supervision-level class frequencies (piece targets without IGNORE for the
// aligned strategies, word tags otherwise).
ClassFrequencyTable supervision_frequencies(const Dataset& dataset, const TrainConfig& config);

ModelParams train_params(std::span<const std::vector<Example>> sentences,
                         std::vector<std::string> classes, std::span<const double> class_weights,
                         const TrainConfig& config);

Model train(const Dataset& dataset, const TrainConfig& config);

/// Argmax per position (lowest class index on ties), projected to words
/// through the first piece when the model is piece-level, then IOB2 repair.
std::vector<Tag> predict_tags(const Model& model, std::span<const std::string> tokens);

/// Tags every sentence. When `expected` is given the model's label set must
/// equal it (IncompatibleTagSet otherwise).
Dataset predict_dataset(const Model& model, std::span<const std::vector<std::string>> sentences,
                        const LabelSet* expected = nullptr);

std::vector<std::vector<std::string>> tokens_of(const Dataset& dataset);

}  // namespace somd
