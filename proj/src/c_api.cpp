#include "somd/somd.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include <json.hpp>

#include "somd/align.hpp"
#include "somd/corpus.hpp"
#include "somd/duallabel.hpp"
#include "somd/error.hpp"
#include "somd/eval.hpp"
#include "somd/experiment.hpp"
#include "somd/rebalance.hpp"
#include "somd/tagger.hpp"

struct somd_catalog {
  somd::LabelCatalog catalog;
};

struct somd_dataset {
  somd::Dataset dataset;
  std::vector<somd::CorpusViolation> violations;
};

struct somd_model {
  somd::Model model;
};

namespace {

thread_local std::string last_error;

somd_status fail(somd_status status, const std::string& message) {
  last_error = message;
  return status;
}

// Runs `body`, translating exceptions into status codes.
template <typename F>
somd_status guarded(F&& body) {
  try {
    last_error.clear();
    body();
    return SOMD_OK;
  } catch (const somd::Error& e) {
    return fail(static_cast<somd_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(SOMD_ERR_INTERNAL, "out of memory");
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(SOMD_ERR_IO, e.what());
  } catch (const std::exception& e) {
    return fail(SOMD_ERR_INTERNAL, e.what());
  }
}

void require(const void* p, const char* what) {
  if (p == nullptr)
    throw somd::Error(somd::ErrorCode::InvalidArgument, std::string(what) + " must not be null");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

const somd::LabelSet& label_space(const somd::LabelCatalog& catalog, somd_label_space space) {
  switch (space) {
    case SOMD_LABELS_COMPOSITE: return catalog.composites();
    case SOMD_LABELS_SOFTWARE: return catalog.software_types();
    case SOMD_LABELS_MENTION: return catalog.mention_types();
  }
  throw somd::Error(somd::ErrorCode::InvalidArgument, "unknown label space");
}

somd::Supervision supervision(somd_strategy s) {
  switch (s) {
    case SOMD_STRATEGY_WORD: return somd::Supervision::Word;
    case SOMD_STRATEGY_UNIFIED: return somd::Supervision::Unified;
    case SOMD_STRATEGY_SELECTIVE: return somd::Supervision::Selective;
  }
  throw somd::Error(somd::ErrorCode::InvalidArgument, "unknown strategy");
}

}  // namespace

extern "C" {

const char* somd_version(void) { return somd::kToolkitVersion; }

const char* somd_status_name(somd_status status) {
  if (status == SOMD_OK) return "OK";
  return somd::error_code_name(static_cast<somd::ErrorCode>(status));
}

const char* somd_last_error(void) { return last_error.c_str(); }

void somd_string_free(char* s) { std::free(s); }

somd_status somd_catalog_default(somd_catalog** out) {
  return guarded([&] {
    require(out, "out");
    *out = new somd_catalog{somd::LabelCatalog::defaults()};
  });
}

somd_status somd_catalog_parse(const char* text, somd_catalog** out) {
  return guarded([&] {
    require(text, "text");
    require(out, "out");
    *out = new somd_catalog{somd::LabelCatalog::parse(text)};
  });
}

somd_status somd_catalog_to_text(const somd_catalog* catalog, char** out) {
  return guarded([&] {
    require(catalog, "catalog");
    require(out, "out");
    *out = dup_string(catalog->catalog.to_text());
  });
}

void somd_catalog_free(somd_catalog* catalog) { delete catalog; }

somd_status somd_dataset_parse(const char* text, const somd_catalog* catalog,
                               somd_label_space space, int strict, somd_dataset** out) {
  return guarded([&] {
    require(text, "text");
    require(catalog, "catalog");
    require(out, "out");
    auto parsed = somd::parse_conll(text, label_space(catalog->catalog, space),
                                    strict ? somd::ParseMode::Strict : somd::ParseMode::Lenient);
    *out = new somd_dataset{std::move(parsed.dataset), std::move(parsed.violations)};
  });
}

somd_status somd_dataset_serialize(const somd_dataset* dataset, char** out) {
  return guarded([&] {
    require(dataset, "dataset");
    require(out, "out");
    *out = dup_string(somd::serialize_conll(dataset->dataset));
  });
}

size_t somd_dataset_size(const somd_dataset* dataset) {
  return dataset == nullptr ? 0 : dataset->dataset.size();
}

size_t somd_dataset_violation_count(const somd_dataset* dataset) {
  return dataset == nullptr ? 0 : dataset->violations.size();
}

somd_status somd_dataset_violations_json(const somd_dataset* dataset, char** out) {
  return guarded([&] {
    require(dataset, "dataset");
    require(out, "out");
    auto arr = nlohmann::json::array();
    for (const auto& v : dataset->violations) {
      arr.push_back({{"sentence", v.sentence},
                     {"line", v.line},
                     {"index", v.violation.index},
                     {"kind", v.violation.kind == somd::ViolationKind::OrphanInside
                                  ? "orphan_inside"
                                  : "label_mismatch"},
                     {"message", v.message}});
    }
    *out = dup_string(arr.dump(2) + "\n");
  });
}

somd_status somd_dataset_stats_json(const somd_dataset* dataset, char** out) {
  return guarded([&] {
    require(dataset, "dataset");
    require(out, "out");
    *out = dup_string(somd::dataset_stats(dataset->dataset).to_json());
  });
}

void somd_dataset_free(somd_dataset* dataset) { delete dataset; }

void somd_align_options_init(somd_align_options* options) {
  if (options == nullptr) return;
  options->strategy = SOMD_STRATEGY_SELECTIVE;
  options->chunk = 4;
  options->unified_bi_conversion = 0;
  options->piece_map_text = nullptr;
}

somd_status somd_align(const somd_dataset* dataset, const somd_align_options* options,
                       char** out) {
  return guarded([&] {
    require(dataset, "dataset");
    require(options, "options");
    require(out, "out");
    if (options->strategy == SOMD_STRATEGY_WORD)
      throw somd::Error(somd::ErrorCode::InvalidArgument, "alignment needs unified or selective");
    const auto strategy = options->strategy == SOMD_STRATEGY_UNIFIED ? somd::AlignStrategy::Unified
                                                                      : somd::AlignStrategy::Selective;
    const auto& sentences = dataset->dataset.sentences;
    std::vector<somd::WordPieceMap> maps;
    if (options->piece_map_text != nullptr) {
      maps = somd::import_piece_maps(options->piece_map_text, sentences);
    } else {
      for (const auto& s : sentences) maps.push_back(somd::segment_words(s.tokens, {options->chunk}));
    }
    std::string text;
    for (std::size_t i = 0; i < sentences.size(); ++i) {
      if (i > 0) text += '\n';
      const auto aligned =
          somd::align(sentences[i], maps[i], strategy, options->unified_bi_conversion != 0);
      text += somd::format_alignment(aligned, maps[i]);
    }
    *out = dup_string(text);
  });
}

somd_status somd_class_weights_json(const somd_dataset* dataset, double w_max,
                                    somd_scaling_mode mode, somd_strategy strategy, size_t chunk,
                                    char** out) {
  return guarded([&] {
    require(dataset, "dataset");
    require(out, "out");
    somd::TrainConfig tc;
    tc.supervision = supervision(strategy);
    tc.chunk = chunk;
    const somd::WeightScalingConfig scaling{
        1.0, w_max, mode == SOMD_SCALE_CLIP ? somd::ScalingMode::Clip : somd::ScalingMode::Rescale};
    const auto freq = somd::supervision_frequencies(dataset->dataset, tc);
    *out = dup_string(somd::class_weights(freq, scaling).to_json());
  });
}

somd_status somd_adaptive_sample(const somd_dataset* dataset, size_t factor, double multiplier,
                                 uint64_t seed, somd_dataset** out) {
  return guarded([&] {
    require(dataset, "dataset");
    require(out, "out");
    *out = new somd_dataset{somd::adaptive_sample(dataset->dataset, {factor, multiplier, seed}), {}};
  });
}

somd_status somd_split(const somd_dataset* dataset, const somd_catalog* catalog,
                       somd_dataset** software, somd_dataset** mention) {
  return guarded([&] {
    require(dataset, "dataset");
    require(catalog, "catalog");
    require(software, "software");
    require(mention, "mention");
    auto parts = somd::split_dataset(dataset->dataset, catalog->catalog);
    auto sw = std::make_unique<somd_dataset>(somd_dataset{std::move(parts.software), {}});
    *mention = new somd_dataset{std::move(parts.mention), {}};
    *software = sw.release();
  });
}

somd_status somd_merge(const somd_dataset* software, const somd_dataset* mention,
                       const somd_catalog* catalog, somd_merge_policy policy, somd_dataset** out) {
  return guarded([&] {
    require(software, "software");
    require(mention, "mention");
    require(catalog, "catalog");
    require(out, "out");
    const auto p = policy == SOMD_MERGE_SOFTWARE_PRECEDENCE ? somd::MergePolicy::SoftwarePrecedence
                                                            : somd::MergePolicy::Strict;
    *out = new somd_dataset{
        somd::merge_datasets(software->dataset, mention->dataset, p, catalog->catalog), {}};
  });
}

void somd_train_options_init(somd_train_options* options) {
  if (options == nullptr) return;
  const somd::TrainConfig defaults;
  options->strategy = SOMD_STRATEGY_SELECTIVE;
  options->epochs = defaults.epochs;
  options->learning_rate = defaults.learning_rate;
  options->seed = defaults.seed;
  options->l2 = defaults.l2;
  options->context_window = defaults.context_window;
  options->batch_size = defaults.batch_size;
  options->chunk = defaults.chunk;
  options->unified_bi_conversion = 0;
  options->class_weights_json = nullptr;
  options->adaptive_sampling = 0;
  options->sample_factor = 2;
  options->sample_multiplier = 1.5;
}

somd_status somd_train(const somd_dataset* dataset, const somd_train_options* options,
                       somd_model** out) {
  return guarded([&] {
    require(dataset, "dataset");
    require(options, "options");
    require(out, "out");
    somd::TrainConfig tc;
    tc.supervision = supervision(options->strategy);
    tc.epochs = options->epochs;
    tc.learning_rate = options->learning_rate;
    tc.seed = options->seed;
    tc.l2 = options->l2;
    tc.context_window = options->context_window;
    tc.batch_size = options->batch_size;
    tc.chunk = options->chunk;
    tc.unified_bi_conversion = options->unified_bi_conversion != 0;
    if (options->class_weights_json != nullptr)
      tc.class_weights = somd::ClassWeights::from_json(options->class_weights_json);
    if (options->adaptive_sampling) {
      const auto sampled = somd::adaptive_sample(
          dataset->dataset, {options->sample_factor, options->sample_multiplier, options->seed});
      *out = new somd_model{somd::train(sampled, tc)};
    } else {
      *out = new somd_model{somd::train(dataset->dataset, tc)};
    }
  });
}

somd_status somd_model_save(const somd_model* model, const char* path) {
  return guarded([&] {
    require(model, "model");
    require(path, "path");
    model->model.save(path);
  });
}

somd_status somd_model_load(const char* path, somd_model** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new somd_model{somd::Model::load(path)};
  });
}

somd_status somd_model_to_json(const somd_model* model, char** out) {
  return guarded([&] {
    require(model, "model");
    require(out, "out");
    *out = dup_string(model->model.to_json());
  });
}

somd_status somd_predict(const somd_model* model, const char* input_text, char** out) {
  return guarded([&] {
    require(model, "model");
    require(input_text, "input_text");
    require(out, "out");
    const auto blocks = somd::parse_token_blocks(input_text);
    *out = dup_string(somd::serialize_conll(somd::predict_dataset(model->model, blocks)));
  });
}

void somd_model_free(somd_model* model) { delete model; }

somd_status somd_score_json(const somd_dataset* gold, const somd_dataset* pred, char** out) {
  return guarded([&] {
    require(gold, "gold");
    require(pred, "pred");
    require(out, "out");
    *out = dup_string(somd::exact_match_score(gold->dataset, pred->dataset).to_json());
  });
}

somd_status somd_score_table(const somd_dataset* gold, const somd_dataset* pred, int per_class,
                             char** out) {
  return guarded([&] {
    require(gold, "gold");
    require(pred, "pred");
    require(out, "out");
    *out = dup_string(
        somd::exact_match_score(gold->dataset, pred->dataset).to_table(per_class != 0));
  });
}

somd_status somd_run_experiment(const char* config_text, const char* base_dir, const char* out_dir,
                                char** report_json) {
  return guarded([&] {
    require(config_text, "config_text");
    require(out_dir, "out_dir");
    require(report_json, "report_json");
    const auto configs =
        somd::parse_experiment_configs(config_text, base_dir != nullptr ? base_dir : ".");
    if (configs.size() != 1)
      throw somd::Error(somd::ErrorCode::InvalidConfig,
                        "expected one experiment, found " + std::to_string(configs.size()) +
                            " (use the grid runner)");
    *report_json = dup_string(somd::run_experiment(configs.front(), out_dir).report_json);
  });
}

somd_status somd_run_grid(const char* config_text, const char* base_dir, const char* out_dir,
                          char** summary_tsv, size_t* failed_rows) {
  return guarded([&] {
    require(config_text, "config_text");
    require(out_dir, "out_dir");
    require(summary_tsv, "summary_tsv");
    const auto configs =
        somd::parse_experiment_configs(config_text, base_dir != nullptr ? base_dir : ".");
    const auto rows = somd::run_grid(configs, out_dir);
    std::size_t failed = 0;
    for (const auto& r : rows) failed += r.error.empty() ? 0 : 1;
    if (failed_rows != nullptr) *failed_rows = failed;
    *summary_tsv = dup_string(somd::grid_summary_tsv(rows));
  });
}

}  // extern "C"
