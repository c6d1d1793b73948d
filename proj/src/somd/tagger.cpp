#include "somd/tagger.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "somd/error.hpp"
#include "somd/random.hpp"
#include "somd/text.hpp"

namespace somd {

std::uint32_t hash_feature(std::string_view feature) noexcept {
  return static_cast<std::uint32_t>(fnv1a64(feature)) & kFeatureMask;
}

std::string word_shape(std::string_view token) {
  std::string shape(token);
  for (char& c : shape) {
    if (c >= 'A' && c <= 'Z')
      c = 'X';
    else if (c >= 'a' && c <= 'z')
      c = 'x';
    else if (c >= '0' && c <= '9')
      c = 'd';
  }
  return shape;
}

std::vector<std::string> feature_strings(std::span<const std::string> tokens,
                                         std::size_t position, std::size_t window) {
  if (position >= tokens.size())
    throw Error(ErrorCode::InvalidArgument, "feature position " + std::to_string(position) +
                                                " outside a sentence of " +
                                                std::to_string(tokens.size()) + " tokens");
  const std::string lower = to_lower_ascii(tokens[position]);
  std::vector<std::string> out;
  out.reserve(6 + 2 * window);
  out.push_back("id=" + lower);
  out.push_back("shape=" + word_shape(tokens[position]));
  out.push_back("pre3=" + lower.substr(0, 3));
  out.push_back("suf3=" + (lower.size() > 3 ? lower.substr(lower.size() - 3) : lower));
  for (std::size_t d = 1; d <= window; ++d) {
    const std::string offset = std::to_string(d);
    out.push_back("w-" + offset + "=" +
                  (position >= d ? to_lower_ascii(tokens[position - d]) : std::string("<s>")));
    out.push_back("w+" + offset + "=" +
                  (position + d < tokens.size() ? to_lower_ascii(tokens[position + d])
                                                : std::string("</s>")));
  }
  if (position == 0) out.emplace_back("BOS");
  if (position + 1 == tokens.size()) out.emplace_back("EOS");
  return out;
}

FeatureVector extract_features(std::span<const std::string> tokens, std::size_t position,
                               std::size_t window) {
  FeatureVector fv;
  for (const auto& f : feature_strings(tokens, position, window)) fv.ids.push_back(hash_feature(f));
  std::sort(fv.ids.begin(), fv.ids.end());
  fv.ids.erase(std::unique(fv.ids.begin(), fv.ids.end()), fv.ids.end());
  return fv;
}

const double* SparseRows::find(std::uint32_t id) const {
  auto it = index_.find(id);
  return it == index_.end() ? nullptr : data_.data() + it->second * width_;
}

double* SparseRows::find(std::uint32_t id) {
  auto it = index_.find(id);
  return it == index_.end() ? nullptr : data_.data() + it->second * width_;
}

double* SparseRows::get_or_create(std::uint32_t id) {
  auto [it, inserted] = index_.try_emplace(id, index_.size());
  if (inserted) data_.resize(data_.size() + width_, 0.0);
  return data_.data() + it->second * width_;
}

std::vector<std::uint32_t> SparseRows::sorted_ids() const {
  std::vector<std::uint32_t> ids;
  ids.reserve(index_.size());
  for (const auto& [id, row] : index_) ids.push_back(id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

bool operator==(const SparseRows& a, const SparseRows& b) {
  if (a.width_ != b.width_ || a.index_.size() != b.index_.size()) return false;
  for (const auto& [id, row] : a.index_) {
    const double* other = b.find(id);
    if (other == nullptr) return false;
    if (!std::equal(a.data_.begin() + static_cast<std::ptrdiff_t>(row * a.width_),
                    a.data_.begin() + static_cast<std::ptrdiff_t>((row + 1) * a.width_), other))
      return false;
  }
  return true;
}

ModelParams::ModelParams(std::vector<std::string> class_names)
    : classes(std::move(class_names)), weights(classes.size()), bias(classes.size(), 0.0) {}

std::vector<double> ModelParams::scores(const FeatureVector& features) const {
  std::vector<double> s(bias);
  const std::size_t k = classes.size();
  for (std::uint32_t id : features.ids) {
    if (const double* row = weights.find(id))
      for (std::size_t c = 0; c < k; ++c) s[c] += row[c];
  }
  return s;
}

std::vector<double> softmax(std::span<const double> scores) {
  std::vector<double> p(scores.begin(), scores.end());
  if (p.empty()) return p;
  const double mx = *std::max_element(p.begin(), p.end());
  double z = 0.0;
  for (double& v : p) {
    v = std::exp(v - mx);
    z += v;
  }
  for (double& v : p) v /= z;
  return p;
}

LossAndGradient loss_and_gradient(const ModelParams& params, std::span<const Example> batch,
                                  std::span<const double> class_weights) {
  const std::size_t k = params.num_classes();
  if (!class_weights.empty() && class_weights.size() != k)
    throw Error(ErrorCode::LengthMismatch, "expected " + std::to_string(k) + " class weights, got " +
                                               std::to_string(class_weights.size()));
  auto weight_of = [&](std::size_t c) { return class_weights.empty() ? 1.0 : class_weights[c]; };

  double weight_sum = 0.0;
  for (const Example& ex : batch) {
    if (!ex.target) continue;
    if (*ex.target >= k)
      throw Error(ErrorCode::IncompatibleTagSet, "target class " + std::to_string(*ex.target) +
                                                     " outside " + std::to_string(k) + " classes");
    weight_sum += weight_of(*ex.target);
  }
  if (weight_sum == 0.0)
    throw Error(ErrorCode::EmptyBatchAfterFiltering, "batch has no supervised positions");

  LossAndGradient out;
  out.gradient.weights = SparseRows(k);
  out.gradient.bias.assign(k, 0.0);
  std::vector<double> coef(k);
  for (const Example& ex : batch) {
    if (!ex.target) continue;
    const std::size_t y = *ex.target;
    const double w = weight_of(y) / weight_sum;
    const auto s = params.scores(ex.features);
    const double mx = *std::max_element(s.begin(), s.end());
    double z = 0.0;
    for (double v : s) z += std::exp(v - mx);
    const double log_z = mx + std::log(z);
    out.loss += w * (log_z - s[y]);
    for (std::size_t c = 0; c < k; ++c) coef[c] = w * std::exp(s[c] - log_z);
    coef[y] -= w;
    for (std::size_t c = 0; c < k; ++c) out.gradient.bias[c] += coef[c];
    for (std::uint32_t id : ex.features.ids) {
      double* row = out.gradient.weights.get_or_create(id);
      for (std::size_t c = 0; c < k; ++c) row[c] += coef[c];
    }
  }
  if (!std::isfinite(out.loss)) throw Error(ErrorCode::Internal, "loss is not finite");
  return out;
}

const char* supervision_name(Supervision s) noexcept {
  switch (s) {
    case Supervision::Word: return "word";
    case Supervision::Unified: return "unified";
    case Supervision::Selective: return "selective";
  }
  return "selective";
}

Supervision parse_supervision(std::string_view name) {
  if (name == "word") return Supervision::Word;
  if (name == "unified") return Supervision::Unified;
  if (name == "selective") return Supervision::Selective;
  throw Error(ErrorCode::InvalidConfig, "unknown strategy '" + std::string(name) + "'");
}

void TrainConfig::validate() const {
  if (epochs < 1) throw Error(ErrorCode::InvalidConfig, "epochs must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
    throw Error(ErrorCode::InvalidConfig, "learning rate must be > 0");
  if (!(l2 >= 0.0) || !std::isfinite(l2)) throw Error(ErrorCode::InvalidConfig, "l2 must be >= 0");
  if (batch_size < 1) throw Error(ErrorCode::InvalidConfig, "batch size must be >= 1");
  if (chunk < 1) throw Error(ErrorCode::InvalidConfig, "segmenter chunk must be >= 1");
}

namespace {

std::vector<std::string> class_names(const LabelSet& labels) {
  std::vector<std::string> names;
  for (const Tag& t : labels.tag_space()) names.push_back(t.str());
  return names;
}

std::size_t class_index(const std::vector<std::string>& classes, const Tag& tag) {
  const std::string name = tag.str();
  auto it = std::find(classes.begin(), classes.end(), name);
  if (it == classes.end())
    throw Error(ErrorCode::IncompatibleTagSet, "tag '" + name + "' is not a model class");
  return static_cast<std::size_t>(it - classes.begin());
}

std::vector<Example> sentence_examples(std::span<const std::string> units,
                                       std::span<const Target> targets,
                                       const std::vector<std::string>& classes,
                                       std::size_t window) {
  std::vector<Example> out;
  out.reserve(units.size());
  for (std::size_t i = 0; i < units.size(); ++i) {
    Example ex{extract_features(units, i, window), std::nullopt};
    if (targets[i]) ex.target = class_index(classes, *targets[i]);
    out.push_back(std::move(ex));
  }
  return out;
}

AlignStrategy strategy_of(Supervision s) {
  return s == Supervision::Unified ? AlignStrategy::Unified : AlignStrategy::Selective;
}

}  // namespace

std::vector<std::vector<Example>> build_examples(const Dataset& dataset, const TrainConfig& config) {
  const auto classes = class_names(dataset.labels);
  std::vector<std::vector<Example>> out;
  out.reserve(dataset.size());
  for (const auto& sentence : dataset.sentences) {
    if (config.supervision == Supervision::Word) {
      std::vector<Target> targets(sentence.tags.begin(), sentence.tags.end());
      out.push_back(sentence_examples(sentence.tokens, targets, classes, config.context_window));
    } else {
      const auto map = segment_words(sentence.tokens, {config.chunk});
      const auto aligned =
          align(sentence, map, strategy_of(config.supervision), config.unified_bi_conversion);
      out.push_back(sentence_examples(aligned.pieces, aligned.targets, classes, config.context_window));
    }
  }
  return out;
}

ClassFrequencyTable supervision_frequencies(const Dataset& dataset, const TrainConfig& config) {
  if (config.supervision == Supervision::Word) return class_frequencies(dataset);
  std::vector<AlignedSequence> aligned;
  aligned.reserve(dataset.size());
  for (const auto& sentence : dataset.sentences) {
    const auto map = segment_words(sentence.tokens, {config.chunk});
    aligned.push_back(
        align(sentence, map, strategy_of(config.supervision), config.unified_bi_conversion));
  }
  return class_frequencies(aligned, dataset.labels);
}

ModelParams train_params(std::span<const std::vector<Example>> sentences,
                         std::vector<std::string> classes, std::span<const double> class_weights,
                         const TrainConfig& config) {
  config.validate();
  const bool supervised = std::any_of(sentences.begin(), sentences.end(), [](const auto& s) {
    return std::any_of(s.begin(), s.end(), [](const Example& ex) { return ex.target.has_value(); });
  });
  if (!supervised) throw Error(ErrorCode::EmptySupervision, "no supervised positions to train on");

  ModelParams params(std::move(classes));
  const std::size_t k = params.num_classes();
  Rng rng(config.seed);
  std::vector<std::size_t> order(sentences.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<Example> batch;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle(order, rng);
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      batch.clear();
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      for (std::size_t b = start; b < stop; ++b) {
        const auto& s = sentences[order[b]];
        batch.insert(batch.end(), s.begin(), s.end());
      }
      if (std::none_of(batch.begin(), batch.end(), [](const Example& ex) { return ex.target.has_value(); }))
        continue;
      const auto step = loss_and_gradient(params, batch, class_weights);
      const double lr = config.learning_rate;
      for (std::size_t c = 0; c < k; ++c) params.bias[c] -= lr * step.gradient.bias[c];
      for (std::uint32_t id : step.gradient.weights.sorted_ids()) {
        const double* g = step.gradient.weights.find(id);
        double* w = params.weights.get_or_create(id);
        // L2 decay is applied lazily, to the rows the batch touches.
        for (std::size_t c = 0; c < k; ++c) w[c] -= lr * (g[c] + config.l2 * w[c]);
      }
    }
  }
  return params;
}

Model train(const Dataset& dataset, const TrainConfig& config) {
  config.validate();
  auto classes = class_names(dataset.labels);
  std::vector<double> weights;
  if (config.class_weights) {
    weights.reserve(classes.size());
    for (const auto& c : classes) weights.push_back(config.class_weights->at(c));
  }
  const auto examples = build_examples(dataset, config);
  Model model{dataset.labels, config, {}};
  model.params = train_params(examples, std::move(classes), weights, config);
  return model;
}

namespace {

std::size_t argmax(const std::vector<double>& scores) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < scores.size(); ++c)
    if (scores[c] > scores[best]) best = c;
  return best;
}

void check_model_classes(const Model& model) {
  if (model.params.classes != class_names(model.labels))
    throw Error(ErrorCode::IncompatibleTagSet, "model classes do not match its label set");
}

}  // namespace

std::vector<Tag> predict_tags(const Model& model, std::span<const std::string> tokens) {
  check_model_classes(model);
  const auto& cfg = model.config;
  auto decode = [&](std::span<const std::string> units) {
    std::vector<Tag> tags;
    tags.reserve(units.size());
    for (std::size_t i = 0; i < units.size(); ++i) {
      const auto best = argmax(model.params.scores(extract_features(units, i, cfg.context_window)));
      tags.push_back(*parse_tag(model.params.classes[best]));
    }
    return tags;
  };
  if (cfg.supervision == Supervision::Word) return repair_iob2(decode(tokens));
  const auto map = segment_words(tokens, {cfg.chunk});
  return project_to_words(decode(map.pieces), map);
}

Dataset predict_dataset(const Model& model, std::span<const std::vector<std::string>> sentences,
                        const LabelSet* expected) {
  if (expected != nullptr && !(model.labels == *expected))
    throw Error(ErrorCode::IncompatibleTagSet, "model was trained on a different label set");
  Dataset out;
  out.labels = model.labels;
  out.sentences.reserve(sentences.size());
  for (const auto& tokens : sentences) out.sentences.push_back({tokens, predict_tags(model, tokens)});
  return out;
}

std::vector<std::vector<std::string>> tokens_of(const Dataset& dataset) {
  std::vector<std::vector<std::string>> out;
  out.reserve(dataset.size());
  for (const auto& s : dataset.sentences) out.push_back(s.tokens);
  return out;
}

// Model container ------------------------------------------------------------

namespace {

nlohmann::json config_to_json(const TrainConfig& c) {
  nlohmann::json j;
  j["epochs"] = c.epochs;
  j["learning_rate"] = c.learning_rate;
  j["seed"] = c.seed;
  j["l2"] = c.l2;
  j["context_window"] = c.context_window;
  j["batch_size"] = c.batch_size;
  j["strategy"] = supervision_name(c.supervision);
  j["chunk"] = c.chunk;
  j["unified_bi_conversion"] = c.unified_bi_conversion;
  j["class_weights"] = c.class_weights ? nlohmann::json(c.class_weights->weights) : nlohmann::json();
  return j;
}

TrainConfig config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.epochs = j.at("epochs").get<std::size_t>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.l2 = j.at("l2").get<double>();
  c.context_window = j.at("context_window").get<std::size_t>();
  c.batch_size = j.at("batch_size").get<std::size_t>();
  c.supervision = parse_supervision(j.at("strategy").get<std::string>());
  c.chunk = j.at("chunk").get<std::size_t>();
  c.unified_bi_conversion = j.at("unified_bi_conversion").get<bool>();
  if (!j.at("class_weights").is_null())
    c.class_weights = ClassWeights{j.at("class_weights").get<std::map<std::string, double>>()};
  return c;
}

}  // namespace

std::string Model::to_json() const {
  nlohmann::json j;
  j["format"] = "somd-tagger";
  j["version"] = kModelFormatVersion;
  j["feature_bits"] = kFeatureBits;
  j["labels"] = labels.labels();
  j["classes"] = params.classes;
  j["config"] = config_to_json(config);
  j["bias"] = params.bias;
  auto rows = nlohmann::json::array();
  const std::size_t k = params.num_classes();
  for (std::uint32_t id : params.weights.sorted_ids()) {
    const double* row = params.weights.find(id);
    rows.push_back({id, std::vector<double>(row, row + k)});
  }
  j["weights"] = std::move(rows);
  return j.dump() + "\n";
}

Model Model::from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.value("format", "") != "somd-tagger")
      throw Error(ErrorCode::ModelFormat, "not a tagger model file");
    const int version = j.at("version").get<int>();
    if (version != kModelFormatVersion)
      throw Error(ErrorCode::ModelFormat, "model format version " + std::to_string(version) +
                                              " is not supported (expected " +
                                              std::to_string(kModelFormatVersion) + ")");
    if (j.at("feature_bits").get<unsigned>() != kFeatureBits)
      throw Error(ErrorCode::ModelFormat, "model uses a different feature space");
    Model m;
    m.labels = LabelSet(j.at("labels").get<std::vector<std::string>>());
    m.config = config_from_json(j.at("config"));
    m.params = ModelParams(j.at("classes").get<std::vector<std::string>>());
    const std::size_t k = m.params.num_classes();
    m.params.bias = j.at("bias").get<std::vector<double>>();
    if (m.params.bias.size() != k) throw Error(ErrorCode::ModelFormat, "bias has the wrong length");
    for (const auto& entry : j.at("weights")) {
      const auto id = entry.at(0).get<std::uint32_t>();
      const auto values = entry.at(1).get<std::vector<double>>();
      if (values.size() != k || id > kFeatureMask)
        throw Error(ErrorCode::ModelFormat, "malformed weight row for feature " + std::to_string(id));
      std::copy(values.begin(), values.end(), m.params.weights.get_or_create(id));
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ModelFormat, std::string("model file: ") + e.what());
  }
}

void Model::save(const std::filesystem::path& path) const { write_file(path, to_json()); }

Model Model::load(const std::filesystem::path& path) { return from_json(read_file(path)); }

}  // namespace somd
