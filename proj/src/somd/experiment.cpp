#include "somd/experiment.hpp"

#include <charconv>
#include <cstdio>
#include <functional>
#include <map>

#include <json.hpp>

#include "somd/error.hpp"
#include "somd/text.hpp"

namespace somd {

namespace fs = std::filesystem;

namespace {

std::string format_double(double v) { return nlohmann::json(v).dump(); }

const char* imbalance_name(Imbalance i) {
  switch (i) {
    case Imbalance::None: return "none";
    case Imbalance::Weighted: return "weighted";
    case Imbalance::Adaptive: return "adaptive";
  }
  return "none";
}

Imbalance parse_imbalance(std::string_view v) {
  if (v == "none") return Imbalance::None;
  if (v == "weighted") return Imbalance::Weighted;
  if (v == "adaptive") return Imbalance::Adaptive;
  throw Error(ErrorCode::InvalidConfig, "unknown imbalance strategy '" + std::string(v) + "'");
}

ClassifierLayout parse_layout(std::string_view v) {
  if (v == "single") return ClassifierLayout::Single;
  if (v == "dual") return ClassifierLayout::Dual;
  throw Error(ErrorCode::InvalidConfig, "unknown classifier layout '" + std::string(v) + "'");
}

template <typename T>
T parse_number(std::string_view key, std::string_view v) {
  T out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw Error(ErrorCode::InvalidConfig, "'" + std::string(key) + "' expects a number, got '" +
                                              std::string(v) + "'");
  return out;
}

bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw Error(ErrorCode::InvalidConfig, "'" + std::string(key) + "' expects true or false");
}

using Section = std::vector<std::pair<std::string, std::string>>;

void apply(ExperimentConfig& c, const std::string& key, const std::string& value,
           const fs::path& base_dir) {
  auto path = [&](const std::string& v) {
    fs::path p(v);
    return p.is_absolute() ? p : (base_dir / p).lexically_normal();
  };
  static const std::map<std::string, std::function<void(ExperimentConfig&, const std::string&)>>
      setters = {
          {"name", [](auto& c, const auto& v) { c.name = v; }},
          {"labeling", [](auto& c, const auto& v) { c.labeling = parse_strategy(v); }},
          {"imbalance", [](auto& c, const auto& v) { c.imbalance = parse_imbalance(v); }},
          {"w_min", [](auto& c, const auto& v) { c.weighting.w_min = parse_number<double>("w_min", v); }},
          {"w_max", [](auto& c, const auto& v) { c.weighting.w_max = parse_number<double>("w_max", v); }},
          {"weight_mode", [](auto& c, const auto& v) { c.weighting.mode = parse_scaling_mode(v); }},
          {"factor", [](auto& c, const auto& v) { c.sampling.oversample_factor = parse_number<std::size_t>("factor", v); }},
          {"multiplier", [](auto& c, const auto& v) { c.sampling.multiplier = parse_number<double>("multiplier", v); }},
          {"classifier", [](auto& c, const auto& v) { c.classifier = parse_layout(v); }},
          {"policy", [](auto& c, const auto& v) { c.policy = parse_merge_policy(v); }},
          {"seed", [](auto& c, const auto& v) { c.seed = parse_number<std::uint64_t>("seed", v); }},
          {"epochs", [](auto& c, const auto& v) { c.training.epochs = parse_number<std::size_t>("epochs", v); }},
          {"learning_rate", [](auto& c, const auto& v) { c.training.learning_rate = parse_number<double>("learning_rate", v); }},
          {"l2", [](auto& c, const auto& v) { c.training.l2 = parse_number<double>("l2", v); }},
          {"context_window", [](auto& c, const auto& v) { c.training.context_window = parse_number<std::size_t>("context_window", v); }},
          {"batch_size", [](auto& c, const auto& v) { c.training.batch_size = parse_number<std::size_t>("batch_size", v); }},
          {"chunk", [](auto& c, const auto& v) { c.training.chunk = parse_number<std::size_t>("chunk", v); }},
          {"unified_bi_conversion", [](auto& c, const auto& v) { c.training.unified_bi_conversion = parse_bool("unified_bi_conversion", v); }},
      };
  if (key == "train") {
    c.train = path(value);
  } else if (key == "test") {
    c.test = path(value);
  } else if (key == "catalog") {
    c.catalog = path(value);
  } else if (key == "pred") {
    c.pred = path(value);
  } else if (auto it = setters.find(key); it != setters.end()) {
    it->second(c, value);
  } else {
    throw Error(ErrorCode::InvalidConfig, "unknown config key '" + key + "'");
  }
}

}  // namespace

void ExperimentConfig::validate() const {
  if (train.empty() && !pred) throw Error(ErrorCode::InvalidConfig, "config has no train file");
  if (test.empty()) throw Error(ErrorCode::InvalidConfig, "config has no test file");
  if (imbalance == Imbalance::Weighted) weighting.validate();
  if (imbalance == Imbalance::Adaptive) sampling.validate();
  training.validate();
}

std::string ExperimentConfig::method_name() const {
  if (!name.empty()) return name;
  std::string out;
  if (classifier == ClassifierLayout::Dual) out = "Dual-Classifier";
  switch (imbalance) {
    case Imbalance::None:
      if (out.empty())
        out = labeling == AlignStrategy::Unified ? "Unified Labeling" : "Selective Labeling";
      break;
    case Imbalance::Weighted:
      out += (out.empty() ? "" : " + ") + std::string("Weighted loss scaled@") +
             format_double(weighting.w_max);
      break;
    case Imbalance::Adaptive:
      out += (out.empty() ? "" : " + ") + std::string("Adaptive Sampling multiples@") +
             format_double(sampling.multiplier);
      break;
  }
  return out;
}

std::string ExperimentConfig::canonical() const {
  std::string out = "[experiment]\n";
  auto kv = [&](const char* k, const std::string& v) { out += std::string(k) + " = " + v + "\n"; };
  kv("name", method_name());
  kv("labeling", strategy_name(labeling));
  kv("imbalance", imbalance_name(imbalance));
  kv("w_min", format_double(weighting.w_min));
  kv("w_max", format_double(weighting.w_max));
  kv("weight_mode", scaling_mode_name(weighting.mode));
  kv("factor", std::to_string(sampling.oversample_factor));
  kv("multiplier", format_double(sampling.multiplier));
  kv("classifier", classifier == ClassifierLayout::Dual ? "dual" : "single");
  kv("policy", merge_policy_name(policy));
  kv("seed", std::to_string(seed));
  if (!train.empty()) kv("train", train.string());
  kv("test", test.string());
  if (catalog) kv("catalog", catalog->string());
  if (pred) kv("pred", pred->string());
  kv("epochs", std::to_string(training.epochs));
  kv("learning_rate", format_double(training.learning_rate));
  kv("l2", format_double(training.l2));
  kv("context_window", std::to_string(training.context_window));
  kv("batch_size", std::to_string(training.batch_size));
  kv("chunk", std::to_string(training.chunk));
  kv("unified_bi_conversion", training.unified_bi_conversion ? "true" : "false");
  return out;
}

std::uint64_t ExperimentConfig::hash() const { return fnv1a64(canonical()); }

std::vector<ExperimentConfig> parse_experiment_configs(std::string_view text,
                                                       const fs::path& base_dir) {
  Section defaults;
  std::vector<Section> experiments;
  Section* current = &defaults;
  std::size_t line_no = 0;
  for (std::string_view raw : split_lines(text)) {
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;
    if (line.front() == '[') {
      if (line == "[defaults]") {
        current = &defaults;
      } else if (line == "[experiment]") {
        experiments.emplace_back();
        current = &experiments.back();
      } else {
        throw Error(ErrorCode::InvalidConfig,
                    "config line " + std::to_string(line_no) + ": unknown section " + std::string(line));
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw Error(ErrorCode::InvalidConfig,
                  "config line " + std::to_string(line_no) + ": expected 'key = value'");
    current->emplace_back(std::string(trim(line.substr(0, eq))),
                          std::string(trim(line.substr(eq + 1))));
  }
  if (experiments.empty()) experiments.emplace_back();

  std::vector<ExperimentConfig> configs;
  for (const Section& section : experiments) {
    ExperimentConfig c;
    for (const auto& [k, v] : defaults) apply(c, k, v, base_dir);
    for (const auto& [k, v] : section) apply(c, k, v, base_dir);
    c.sampling.seed = c.seed;
    c.training.seed = c.seed;
    c.training.supervision =
        c.labeling == AlignStrategy::Unified ? Supervision::Unified : Supervision::Selective;
    c.validate();
    configs.push_back(std::move(c));
  }
  return configs;
}

namespace {

struct Log {
  std::string text;
  void operator()(const std::string& line) { text += line + "\n"; }
};

std::string describe_counts(const ClassFrequencyTable& freq) {
  std::size_t o = 0;
  if (auto it = freq.counts.find("O"); it != freq.counts.end()) o = it->second;
  return std::to_string(freq.total) + " supervised positions, " + std::to_string(o) + " O";
}

Model train_stream(const Dataset& data, const ExperimentConfig& config, const std::string& tag,
                   Log& log) {
  TrainConfig tc = config.training;
  if (config.imbalance == Imbalance::Weighted) {
    const auto freq = supervision_frequencies(data, tc);
    tc.class_weights = class_weights(freq, config.weighting);
    log(tag + ": class weights from " + describe_counts(freq) + ", w_max " +
        format_double(config.weighting.w_max));
  }
  log(tag + ": training on " + std::to_string(data.size()) + " sentences");
  return train(data, tc);
}

}  // namespace

ExperimentOutcome run_experiment(const ExperimentConfig& config, const fs::path& out_dir) {
  config.validate();
  Log log;
  fs::create_directories(out_dir);
  write_file(out_dir / "config.ini", config.canonical());
  log("method: " + config.method_name());

  const LabelCatalog catalog =
      config.catalog ? LabelCatalog::parse(read_file(*config.catalog)) : LabelCatalog::defaults();
  const Dataset test = parse_conll(read_file(config.test), catalog.composites(), ParseMode::Strict).dataset;
  log("test: " + std::to_string(test.size()) + " sentences");

  Dataset pred;
  if (config.pred) {
    pred = parse_conll(read_file(*config.pred), catalog.composites(), ParseMode::Lenient).dataset;
    log("prediction file supplied; training skipped");
  } else {
    Dataset train_set =
        parse_conll(read_file(config.train), catalog.composites(), ParseMode::Strict).dataset;
    log("train: " + std::to_string(train_set.size()) + " sentences");
    if (config.imbalance == Imbalance::Adaptive) {
      const auto parts = partition_by_mentions(train_set);
      train_set = adaptive_sample(train_set, config.sampling);
      log("adaptive sampling: " + std::to_string(parts.under.size()) + " with mentions x" +
          std::to_string(config.sampling.oversample_factor) + ", " +
          std::to_string(parts.over.size()) + " all-O pool -> " +
          std::to_string(train_set.size()) + " sentences");
    }
    const auto test_tokens = tokens_of(test);
    if (config.classifier == ClassifierLayout::Single) {
      const Model model = train_stream(train_set, config, "model", log);
      model.save(out_dir / "model.json");
      pred = predict_dataset(model, test_tokens, &catalog.composites());
    } else {
      const auto streams = split_dataset(train_set, catalog);
      const Model sw = train_stream(streams.software, config, "software model", log);
      const Model mt = train_stream(streams.mention, config, "mention model", log);
      sw.save(out_dir / "model.software.json");
      mt.save(out_dir / "model.mention.json");
      pred = merge_datasets(predict_dataset(sw, test_tokens, &catalog.software_types()),
                            predict_dataset(mt, test_tokens, &catalog.mention_types()),
                            config.policy, catalog);
      log(std::string("merged streams with policy ") + merge_policy_name(config.policy));
    }
  }
  write_file(out_dir / "predictions.conll", serialize_conll(pred));

  ExperimentOutcome outcome;
  outcome.report = exact_match_score(test, pred);
  auto j = nlohmann::json::parse(outcome.report.to_json());
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(config.hash()));
  j["provenance"] = {{"method", config.method_name()},
                     {"config_hash", hash},
                     {"toolkit_version", kToolkitVersion}};
  outcome.report_json = j.dump(2) + "\n";
  write_file(out_dir / "report.json", outcome.report_json);

  const auto& m = outcome.report.micro;
  log("precision " + format_double(m.precision()) + " recall " + format_double(m.recall()) +
      " f1 " + format_double(m.f1()));
  write_file(out_dir / "log.txt", log.text);
  return outcome;
}

namespace {

std::string slug(const std::string& name) {
  std::string out;
  for (char c : name) {
    const bool keep = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '.';
    if (keep)
      out += static_cast<char>(c >= 'A' && c <= 'Z' ? c - 'A' + 'a' : c);
    else if (!out.empty() && out.back() != '-')
      out += '-';
  }
  while (!out.empty() && out.back() == '-') out.pop_back();
  return out;
}

}  // namespace

std::vector<GridRow> run_grid(const std::vector<ExperimentConfig>& configs, const fs::path& out_dir) {
  if (configs.empty()) throw Error(ErrorCode::InvalidConfig, "grid has no experiments");
  std::vector<GridRow> rows;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    GridRow row;
    row.method = configs[i].method_name();
    char prefix[16];
    std::snprintf(prefix, sizeof prefix, "%02zu-", i + 1);
    row.out_dir = out_dir / (prefix + slug(row.method));
    try {
      row.micro = run_experiment(configs[i], row.out_dir).report.micro;
    } catch (const Error& e) {
      row.error = std::string(error_code_name(e.code())) + ": " + e.what();
    } catch (const std::exception& e) {
      row.error = std::string("Internal: ") + e.what();
    }
    rows.push_back(std::move(row));
  }
  write_file(out_dir / "summary.tsv", grid_summary_tsv(rows));
  write_file(out_dir / "summary.json", grid_summary_json(rows));
  return rows;
}

std::string grid_summary_tsv(const std::vector<GridRow>& rows) {
  std::string out = "method\tprecision\trecall\tf1\tstatus\n";
  char buf[128];
  for (const auto& row : rows) {
    out += row.method;
    if (row.micro) {
      std::snprintf(buf, sizeof buf, "\t%.4f\t%.4f\t%.4f\tok\n", row.micro->precision(),
                    row.micro->recall(), row.micro->f1());
      out += buf;
    } else {
      out += "\t\t\t\t" + row.error + "\n";
    }
  }
  return out;
}

std::string grid_summary_json(const std::vector<GridRow>& rows) {
  auto arr = nlohmann::json::array();
  for (const auto& row : rows) {
    nlohmann::json r{{"method", row.method}, {"dir", row.out_dir.filename().string()}};
    if (row.micro) {
      r["precision"] = row.micro->precision();
      r["recall"] = row.micro->recall();
      r["f1"] = row.micro->f1();
      r["status"] = "ok";
    } else {
      r["status"] = "error";
      r["error"] = row.error;
    }
    arr.push_back(std::move(r));
  }
  return arr.dump(2) + "\n";
}

}  // namespace somd
