// Command-line front end. Every subcommand goes through the public C API so
// that the CLI and library produce identical outputs for identical inputs.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "somd/somd.h"

namespace fs = std::filesystem;

namespace {

struct StatusError {
  somd_status status;
  std::string message;
};

void check(somd_status status) {
  if (status != SOMD_OK) throw StatusError{status, somd_last_error()};
}

struct CatalogDeleter {
  void operator()(somd_catalog* p) const { somd_catalog_free(p); }
};
struct DatasetDeleter {
  void operator()(somd_dataset* p) const { somd_dataset_free(p); }
};
struct ModelDeleter {
  void operator()(somd_model* p) const { somd_model_free(p); }
};
struct StringDeleter {
  void operator()(char* p) const { somd_string_free(p); }
};

using Catalog = std::unique_ptr<somd_catalog, CatalogDeleter>;
using Dataset = std::unique_ptr<somd_dataset, DatasetDeleter>;
using Model = std::unique_ptr<somd_model, ModelDeleter>;

std::string take(char* s) {
  std::unique_ptr<char, StringDeleter> owned(s);
  return owned ? std::string(owned.get()) : std::string();
}

std::string read_text(const std::string& path) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec))
    throw StatusError{SOMD_ERR_FILE_NOT_FOUND, "file not found: " + path};
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StatusError{SOMD_ERR_IO, "cannot open " + path};
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const std::string& path, const std::string& text) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw StatusError{SOMD_ERR_IO, "cannot write " + path};
  out << text;
}

// Writes to `path`, or standard output when it is empty or "-".
void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-")
    std::cout << text;
  else
    write_text(path, text);
}

struct Globals {
  std::string catalog_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  bool quiet = false;

  void note(const std::string& msg) const {
    if (!quiet) std::cerr << msg << "\n";
  }
};

Catalog load_catalog(const Globals& g) {
  somd_catalog* raw = nullptr;
  if (g.catalog_path.empty())
    check(somd_catalog_default(&raw));
  else
    check(somd_catalog_parse(read_text(g.catalog_path).c_str(), &raw));
  return Catalog(raw);
}

Dataset load_dataset(const std::string& path, const somd_catalog* catalog, bool strict,
                     somd_label_space space = SOMD_LABELS_COMPOSITE) {
  somd_dataset* raw = nullptr;
  check(somd_dataset_parse(read_text(path).c_str(), catalog, space, strict ? 1 : 0, &raw));
  return Dataset(raw);
}

std::string serialize(const somd_dataset* d) {
  char* out = nullptr;
  check(somd_dataset_serialize(d, &out));
  return take(out);
}

somd_strategy parse_strategy(const std::string& s) {
  if (s == "word") return SOMD_STRATEGY_WORD;
  if (s == "unified") return SOMD_STRATEGY_UNIFIED;
  return SOMD_STRATEGY_SELECTIVE;
}

fs::path out_dir_or_cwd(const Globals& g) { return g.out_dir.empty() ? fs::path(".") : fs::path(g.out_dir); }

// "key = value" lines with factor, multiplier and seed.
void read_sample_config(const std::string& path, somd_train_options& opts) {
  std::istringstream in(read_text(path));
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (line.empty() || line[0] == '#' || eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      s.erase(0, s.find_first_not_of(" \t\r"));
      s.erase(s.find_last_not_of(" \t\r") + 1);
      return s;
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "factor")
        opts.sample_factor = std::stoul(value);
      else if (key == "multiplier")
        opts.sample_multiplier = std::stod(value);
      else if (key == "seed")
        opts.seed = std::stoull(value);
      else
        throw StatusError{SOMD_ERR_INVALID_CONFIG, "sample config: unknown key '" + key + "'"};
    } catch (const std::logic_error&) {
      throw StatusError{SOMD_ERR_INVALID_CONFIG, "sample config: bad value for '" + key + "'"};
    }
  }
  opts.adaptive_sampling = 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Software-mention tagging toolkit: IOB2 corpora, label alignment, "
               "class rebalancing, dual classifiers, training and exact-match scoring"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(somd_version()));

  Globals g;
  app.add_option("--catalog", g.catalog_path, "Label catalog file (software:/mention: sections)");
  app.add_option("--seed", g.seed, "Default seed for randomized subcommands");
  app.add_option("--out", g.out_dir, "Output directory (split, run, grid)");
  app.add_flag("--quiet", g.quiet, "Suppress progress notes on standard error");

  int exit_code = 0;

  // validate
  std::string validate_in;
  bool validate_strict = false;
  auto* validate = app.add_subcommand("validate", "Check a CoNLL file for format and IOB2 violations");
  validate->add_option("--in", validate_in, "CoNLL file")->required();
  validate->add_flag("--strict", validate_strict, "Fail on the first IOB2 violation");
  validate->callback([&] {
    auto catalog = load_catalog(g);
    auto data = load_dataset(validate_in, catalog.get(), validate_strict);
    char* out = nullptr;
    check(somd_dataset_violations_json(data.get(), &out));
    std::cout << take(out);
    const auto n = somd_dataset_violation_count(data.get());
    g.note(std::to_string(somd_dataset_size(data.get())) + " sentences, " + std::to_string(n) +
           " IOB2 violations");
    if (n > 0) exit_code = 1;
  });

  // stats
  std::string stats_in, stats_json;
  auto* stats = app.add_subcommand("stats", "Tag, span and sentence statistics as JSON");
  stats->add_option("--in", stats_in, "CoNLL file")->required();
  stats->add_option("--json", stats_json, "Write the JSON here instead of standard output");
  stats->callback([&] {
    auto catalog = load_catalog(g);
    auto data = load_dataset(stats_in, catalog.get(), false);
    char* out = nullptr;
    check(somd_dataset_stats_json(data.get(), &out));
    emit(stats_json, take(out));
  });

  // align
  std::string align_in, align_out, align_piece_map, align_strategy = "selective";
  std::size_t align_chunk = 4;
  bool align_bi = false;
  auto* align = app.add_subcommand("align", "Map word tags onto subtoken targets");
  align->add_option("--in", align_in, "CoNLL file")->required();
  align->add_option("--strategy", align_strategy)->check(CLI::IsMember({"unified", "selective"}));
  align->add_option("--chunk", align_chunk, "Built-in segmenter width")->check(CLI::PositiveNumber);
  align->add_option("--piece-map", align_piece_map, "External 'piece<TAB>word_index' segmentation");
  align->add_flag("--unified-bi-conversion", align_bi, "Use I- on continuation pieces (unified)");
  align->add_option("--out", align_out, "Output file (default: standard output)");
  align->callback([&] {
    auto catalog = load_catalog(g);
    auto data = load_dataset(align_in, catalog.get(), true);
    somd_align_options opts;
    somd_align_options_init(&opts);
    opts.strategy = parse_strategy(align_strategy);
    opts.chunk = align_chunk;
    opts.unified_bi_conversion = align_bi ? 1 : 0;
    std::string piece_text;
    if (!align_piece_map.empty()) {
      piece_text = read_text(align_piece_map);
      opts.piece_map_text = piece_text.c_str();
    }
    char* out = nullptr;
    check(somd_align(data.get(), &opts, &out));
    emit(align_out, take(out));
  });

  // weights
  std::string weights_in, weights_out, weights_mode = "rescale", weights_strategy = "word";
  double weights_w_max = 25.0;
  std::size_t weights_chunk = 4;
  auto* weights = app.add_subcommand("weights", "Scaled inverse-frequency class weights as JSON");
  weights->add_option("--in", weights_in, "CoNLL file")->required();
  weights->add_option("--w-max", weights_w_max, "Maximum weight (studied: 25, 50, 100, 200)");
  weights->add_option("--mode", weights_mode)->check(CLI::IsMember({"rescale", "clip"}));
  weights->add_option("--strategy", weights_strategy, "Count at word or piece level")
      ->check(CLI::IsMember({"word", "unified", "selective"}));
  weights->add_option("--chunk", weights_chunk)->check(CLI::PositiveNumber);
  weights->add_option("--out", weights_out, "Output file (default: standard output)");
  weights->callback([&] {
    auto catalog = load_catalog(g);
    auto data = load_dataset(weights_in, catalog.get(), true);
    char* out = nullptr;
    check(somd_class_weights_json(data.get(), weights_w_max,
                                  weights_mode == "clip" ? SOMD_SCALE_CLIP : SOMD_SCALE_RESCALE,
                                  parse_strategy(weights_strategy), weights_chunk, &out));
    emit(weights_out, take(out));
  });

  // sample
  std::string sample_in, sample_out;
  std::size_t sample_factor = 2;
  double sample_multiplier = 1.5;
  std::optional<std::uint64_t> sample_seed;
  auto* sample = app.add_subcommand("sample", "Adaptive over/under-sampling of sentences");
  sample->add_option("--in", sample_in, "CoNLL file")->required();
  sample->add_option("--factor", sample_factor, "Oversampling factor")->check(CLI::PositiveNumber);
  sample->add_option("--multiplier", sample_multiplier, "Undersampling multiple (studied: 1, 1.5, 3)");
  sample->add_option("--seed", sample_seed);
  sample->add_option("--out", sample_out, "Output CoNLL file (default: standard output)");
  sample->callback([&] {
    auto catalog = load_catalog(g);
    auto data = load_dataset(sample_in, catalog.get(), true);
    somd_dataset* raw = nullptr;
    check(somd_adaptive_sample(data.get(), sample_factor, sample_multiplier,
                               sample_seed.value_or(g.seed.value_or(0)), &raw));
    Dataset sampled(raw);
    emit(sample_out, serialize(sampled.get()));
    g.note(std::to_string(somd_dataset_size(data.get())) + " -> " +
           std::to_string(somd_dataset_size(sampled.get())) + " sentences");
  });

  // split
  std::string split_in, split_stem;
  auto* split = app.add_subcommand("split", "Decompose composite tags into software and mention streams");
  split->add_option("--in", split_in, "CoNLL file")->required();
  split->add_option("--stem", split_stem, "Output stem (default: input file stem)");
  split->callback([&] {
    auto catalog = load_catalog(g);
    auto data = load_dataset(split_in, catalog.get(), true);
    somd_dataset* sw = nullptr;
    somd_dataset* mt = nullptr;
    check(somd_split(data.get(), catalog.get(), &sw, &mt));
    Dataset software(sw), mention(mt);
    const std::string stem = split_stem.empty() ? fs::path(split_in).stem().string() : split_stem;
    const fs::path dir = out_dir_or_cwd(g);
    write_text((dir / (stem + ".software.conll")).string(), serialize(software.get()));
    write_text((dir / (stem + ".mention.conll")).string(), serialize(mention.get()));
    g.note("wrote " + (dir / (stem + ".software.conll")).string() + " and " +
           (dir / (stem + ".mention.conll")).string());
  });

  // merge
  std::string merge_sw, merge_mt, merge_out, merge_policy = "strict";
  auto* merge = app.add_subcommand("merge", "Recompose software and mention predictions");
  merge->add_option("--software", merge_sw, "Software-type prediction file")->required();
  merge->add_option("--mention", merge_mt, "Mention-type prediction file")->required();
  merge->add_option("--policy", merge_policy)->check(CLI::IsMember({"strict", "software-precedence"}));
  merge->add_option("--out", merge_out, "Output CoNLL file (default: standard output)");
  merge->callback([&] {
    auto catalog = load_catalog(g);
    auto sw = load_dataset(merge_sw, catalog.get(), false, SOMD_LABELS_SOFTWARE);
    auto mt = load_dataset(merge_mt, catalog.get(), false, SOMD_LABELS_MENTION);
    somd_dataset* raw = nullptr;
    check(somd_merge(sw.get(), mt.get(), catalog.get(),
                     merge_policy == "strict" ? SOMD_MERGE_STRICT : SOMD_MERGE_SOFTWARE_PRECEDENCE,
                     &raw));
    Dataset merged(raw);
    emit(merge_out, serialize(merged.get()));
  });

  // train
  somd_train_options topts;
  somd_train_options_init(&topts);
  std::string train_in, train_strategy = "selective", train_weights, train_sample_cfg, train_out;
  std::optional<std::uint64_t> train_seed;
  auto* train = app.add_subcommand("train", "Train the token classifier");
  train->add_option("--in", train_in, "Training CoNLL file")->required();
  train->add_option("--strategy", train_strategy, "Supervision level")
      ->check(CLI::IsMember({"word", "unified", "selective"}));
  train->add_option("--weights", train_weights, "Class weights JSON (see 'weights')");
  train->add_option("--sample-config", train_sample_cfg,
                    "Adaptive sampling config (factor, multiplier, seed)");
  train->add_option("--epochs", topts.epochs)->check(CLI::PositiveNumber);
  train->add_option("--lr", topts.learning_rate);
  train->add_option("--seed", train_seed);
  train->add_option("--l2", topts.l2);
  train->add_option("--window", topts.context_window, "Context window radius");
  train->add_option("--batch-size", topts.batch_size)->check(CLI::PositiveNumber);
  train->add_option("--chunk", topts.chunk)->check(CLI::PositiveNumber);
  train->add_flag("--unified-bi-conversion", topts.unified_bi_conversion);
  train->add_option("--out", train_out, "Model file")->required();
  train->callback([&] {
    auto catalog = load_catalog(g);
    auto data = load_dataset(train_in, catalog.get(), true);
    topts.strategy = parse_strategy(train_strategy);
    topts.seed = train_seed.value_or(g.seed.value_or(0));
    if (!train_sample_cfg.empty()) read_sample_config(train_sample_cfg, topts);
    std::string weights_text;
    if (!train_weights.empty()) {
      weights_text = read_text(train_weights);
      topts.class_weights_json = weights_text.c_str();
    }
    somd_model* raw = nullptr;
    check(somd_train(data.get(), &topts, &raw));
    Model model(raw);
    check(somd_model_save(model.get(), train_out.c_str()));
    g.note("model written to " + train_out);
  });

  // predict
  std::string predict_model, predict_in, predict_out;
  auto* predict = app.add_subcommand("predict", "Tag sentences with a trained model");
  predict->add_option("--model", predict_model, "Model file")->required();
  predict->add_option("--in", predict_in, "Tokens (CoNLL or one token per line)")->required();
  predict->add_option("--out", predict_out, "Output CoNLL file (default: standard output)");
  predict->callback([&] {
    if (!fs::is_regular_file(predict_model))
      throw StatusError{SOMD_ERR_FILE_NOT_FOUND, "file not found: " + predict_model};
    somd_model* raw = nullptr;
    check(somd_model_load(predict_model.c_str(), &raw));
    Model model(raw);
    char* out = nullptr;
    check(somd_predict(model.get(), read_text(predict_in).c_str(), &out));
    emit(predict_out, take(out));
  });

  // score
  std::string score_gold, score_pred, score_json;
  bool score_per_class = false;
  auto* score = app.add_subcommand("score", "Exact-match span precision, recall and F1");
  score->add_option("--gold", score_gold, "Gold CoNLL file")->required();
  score->add_option("--pred", score_pred, "Predicted CoNLL file")->required();
  score->add_flag("--per-class", score_per_class, "Include per-label rows");
  score->add_option("--json", score_json, "Also write the JSON report here");
  score->callback([&] {
    auto catalog = load_catalog(g);
    auto gold = load_dataset(score_gold, catalog.get(), true);
    auto pred = load_dataset(score_pred, catalog.get(), false);
    char* table = nullptr;
    check(somd_score_table(gold.get(), pred.get(), score_per_class ? 1 : 0, &table));
    std::cout << take(table);
    if (!score_json.empty()) {
      char* json = nullptr;
      check(somd_score_json(gold.get(), pred.get(), &json));
      write_text(score_json, take(json));
    }
  });

  // run
  std::string run_config;
  auto* run = app.add_subcommand("run", "Run one experiment config");
  run->add_option("--config", run_config, "Experiment config file")->required();
  run->callback([&] {
    const std::string text = read_text(run_config);
    const std::string base = fs::path(run_config).parent_path().string();
    char* report = nullptr;
    check(somd_run_experiment(text.c_str(), base.c_str(), out_dir_or_cwd(g).string().c_str(), &report));
    std::cout << take(report);
  });

  // grid
  std::string grid_config;
  auto* grid = app.add_subcommand("grid", "Run every experiment of a grid config");
  grid->add_option("--config", grid_config, "Grid config file")->required();
  grid->callback([&] {
    const std::string text = read_text(grid_config);
    const std::string base = fs::path(grid_config).parent_path().string();
    char* summary = nullptr;
    std::size_t failed = 0;
    check(somd_run_grid(text.c_str(), base.c_str(), out_dir_or_cwd(g).string().c_str(), &summary,
                        &failed));
    std::cout << take(summary);
    if (failed > 0) {
      std::cerr << "error: " << failed << " grid row(s) failed\n";
      exit_code = 1;
    }
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const StatusError& e) {
    std::cerr << "error: " << somd_status_name(e.status) << ": " << e.message << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: Internal: " << e.what() << "\n";
    return 1;
  }
  return exit_code;
}
