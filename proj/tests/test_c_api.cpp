// Exercises the shared library through its C header only.

#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>

#include "somd/somd.h"

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path data_dir() { return SOMD_TEST_DATA_DIR; }
std::string fixture_text(const char* name) { return slurp(data_dir() / "fixtures" / name); }

struct Str {
  char* p = nullptr;
  ~Str() { somd_string_free(p); }
  std::string s() const { return p ? p : ""; }
};

struct Catalog {
  somd_catalog* p = nullptr;
  ~Catalog() { somd_catalog_free(p); }
};

struct Data {
  somd_dataset* p = nullptr;
  ~Data() { somd_dataset_free(p); }
};

struct ModelH {
  somd_model* p = nullptr;
  ~ModelH() { somd_model_free(p); }
};

}  // namespace

TEST_CASE("version and status names") {
  CHECK(std::string(somd_version()) == "0.1.0");
  CHECK(std::string(somd_status_name(SOMD_OK)) == "OK");
  CHECK(std::string(somd_status_name(SOMD_ERR_INVALID_IOB2)) == "InvalidIOB2");
  CHECK(std::string(somd_status_name(SOMD_ERR_FILE_NOT_FOUND)) == "FileNotFound");
}

TEST_CASE("parse, serialize and inspect") {
  Catalog cat;
  REQUIRE(somd_catalog_default(&cat.p) == SOMD_OK);
  Data d;
  const std::string text = fixture_text("confusion.gold.conll");
  REQUIRE(somd_dataset_parse(text.c_str(), cat.p, SOMD_LABELS_COMPOSITE, 1, &d.p) == SOMD_OK);
  CHECK(somd_dataset_size(d.p) == 1);
  CHECK(somd_dataset_violation_count(d.p) == 0);
  Str out;
  REQUIRE(somd_dataset_serialize(d.p, &out.p) == SOMD_OK);
  CHECK(out.s() == text);
  Str stats;
  REQUIRE(somd_dataset_stats_json(d.p, &stats.p) == SOMD_OK);
  CHECK(stats.s().find("\"O\": 29") != std::string::npos);

  Data bad;
  CHECK(somd_dataset_parse("Linux\tB-Foo_Bar\n", cat.p, SOMD_LABELS_COMPOSITE, 1, &bad.p) ==
        SOMD_ERR_UNKNOWN_LABEL);
  CHECK(bad.p == nullptr);
  CHECK(std::string(somd_last_error()).find("Foo_Bar") != std::string::npos);
  CHECK(somd_dataset_parse("", cat.p, SOMD_LABELS_COMPOSITE, 1, &bad.p) == SOMD_ERR_EMPTY_SENTENCE);
  CHECK(somd_dataset_parse(nullptr, cat.p, SOMD_LABELS_COMPOSITE, 1, &bad.p) ==
        SOMD_ERR_INVALID_ARGUMENT);

  const char* orphan = "x\tI-Application_Mention\n";
  CHECK(somd_dataset_parse(orphan, cat.p, SOMD_LABELS_COMPOSITE, 1, &bad.p) == SOMD_ERR_INVALID_IOB2);
  Data lenient;
  REQUIRE(somd_dataset_parse(orphan, cat.p, SOMD_LABELS_COMPOSITE, 0, &lenient.p) == SOMD_OK);
  CHECK(somd_dataset_violation_count(lenient.p) == 1);
  Str v;
  REQUIRE(somd_dataset_violations_json(lenient.p, &v.p) == SOMD_OK);
  CHECK(v.s().find("\"line\": 1") != std::string::npos);
}

TEST_CASE("catalog text") {
  Catalog cat;
  REQUIRE(somd_catalog_parse("software:\nTool\nmention:\nUsage\n", &cat.p) == SOMD_OK);
  Str t;
  REQUIRE(somd_catalog_to_text(cat.p, &t.p) == SOMD_OK);
  CHECK(t.s().find("Tool") != std::string::npos);
  Catalog bad;
  CHECK(somd_catalog_parse("software:\nBad_Name\nmention:\nUsage\n", &bad.p) == SOMD_ERR_INVALID_CONFIG);
}

TEST_CASE("align, weights and sampling") {
  Catalog cat;
  somd_catalog_default(&cat.p);
  Data d;
  REQUIRE(somd_dataset_parse("Linux\tB-OperatingSystem_Mention\nis\tO\n", cat.p, SOMD_LABELS_COMPOSITE, 1,
                             &d.p) == SOMD_OK);
  somd_align_options opts;
  somd_align_options_init(&opts);
  Str a;
  REQUIRE(somd_align(d.p, &opts, &a.p) == SOMD_OK);
  CHECK(a.s() == "Linu\t0\tB-OperatingSystem_Mention\n##x\t0\tIGNORE\nis\t1\tO\n");
  opts.strategy = SOMD_STRATEGY_UNIFIED;
  Str u;
  REQUIRE(somd_align(d.p, &opts, &u.p) == SOMD_OK);
  CHECK(u.s() == "Linu\t0\tB-OperatingSystem_Mention\n##x\t0\tB-OperatingSystem_Mention\nis\t1\tO\n");
  opts.piece_map_text = "L\t0\n##inux\t0\nis\t2\n";
  Str gap;
  CHECK(somd_align(d.p, &opts, &gap.p) == SOMD_ERR_GAP_IN_WORD_INDICES);

  Str w;
  REQUIRE(somd_class_weights_json(d.p, 25, SOMD_SCALE_RESCALE, SOMD_STRATEGY_WORD, 4, &w.p) == SOMD_OK);
  CHECK(w.s().find("\"O\": 1.0") != std::string::npos);

  Data sampled;
  REQUIRE(somd_adaptive_sample(d.p, 2, 1.5, 7, &sampled.p) == SOMD_OK);
  CHECK(somd_dataset_size(sampled.p) == 2);
}

TEST_CASE("split and merge") {
  Catalog cat;
  somd_catalog_default(&cat.p);
  Data d;
  const std::string text = fixture_text("confusion.gold.conll");
  REQUIRE(somd_dataset_parse(text.c_str(), cat.p, SOMD_LABELS_COMPOSITE, 1, &d.p) == SOMD_OK);
  Data sw, mn, merged;
  REQUIRE(somd_split(d.p, cat.p, &sw.p, &mn.p) == SOMD_OK);
  REQUIRE(somd_merge(sw.p, mn.p, cat.p, SOMD_MERGE_STRICT, &merged.p) == SOMD_OK);
  Str back;
  somd_dataset_serialize(merged.p, &back.p);
  CHECK(back.s() == text);
  Str sws;
  somd_dataset_serialize(sw.p, &sws.p);
  CHECK(sws.s().find("Chaste\tB-PlugIn\n") != std::string::npos);
}

TEST_CASE("train, save, load, predict and score") {
  Catalog cat;
  REQUIRE(somd_catalog_parse(fixture_text("catalog.txt").c_str(), &cat.p) == SOMD_OK);
  Data train, test;
  REQUIRE(somd_dataset_parse(fixture_text("imbalanced.train.conll").c_str(), cat.p, SOMD_LABELS_COMPOSITE,
                             1, &train.p) == SOMD_OK);
  const std::string test_text = fixture_text("imbalanced.test.conll");
  REQUIRE(somd_dataset_parse(test_text.c_str(), cat.p, SOMD_LABELS_COMPOSITE, 1, &test.p) == SOMD_OK);

  somd_train_options opts;
  somd_train_options_init(&opts);
  CHECK(opts.epochs == 4);
  CHECK(opts.learning_rate == 2e-4);
  opts.epochs = 2;
  opts.learning_rate = 2;
  opts.seed = 3;
  opts.adaptive_sampling = 1;
  ModelH m;
  REQUIRE(somd_train(train.p, &opts, &m.p) == SOMD_OK);

  const auto path = (std::filesystem::temp_directory_path() / "somd_capi_model.json").string();
  REQUIRE(somd_model_save(m.p, path.c_str()) == SOMD_OK);
  ModelH loaded;
  REQUIRE(somd_model_load(path.c_str(), &loaded.p) == SOMD_OK);
  std::filesystem::remove(path);
  Str j1, j2;
  somd_model_to_json(m.p, &j1.p);
  somd_model_to_json(loaded.p, &j2.p);
  CHECK(j1.s() == j2.s());

  Str p1, p2;
  REQUIRE(somd_predict(m.p, test_text.c_str(), &p1.p) == SOMD_OK);
  REQUIRE(somd_predict(loaded.p, test_text.c_str(), &p2.p) == SOMD_OK);
  CHECK(p1.s() == p2.s());

  Data pred;
  REQUIRE(somd_dataset_parse(p1.p, cat.p, SOMD_LABELS_COMPOSITE, 0, &pred.p) == SOMD_OK);
  Str report, table;
  REQUIRE(somd_score_json(test.p, pred.p, &report.p) == SOMD_OK);
  CHECK(report.s().find("\"repairs_applied\"") != std::string::npos);
  REQUIRE(somd_score_table(test.p, pred.p, 1, &table.p) == SOMD_OK);
  CHECK(table.s().find("micro") != std::string::npos);

  ModelH missing;
  CHECK(somd_model_load("/nonexistent/model.json", &missing.p) == SOMD_ERR_FILE_NOT_FOUND);
  Str none;
  CHECK(somd_score_json(test.p, train.p, &none.p) == SOMD_ERR_SENTENCE_COUNT_MISMATCH);
}

TEST_CASE("experiments through the C interface") {
  const auto out = std::filesystem::temp_directory_path() / "somd_capi_run";
  std::filesystem::remove_all(out);
  Str report;
  REQUIRE(somd_run_experiment("test = fixtures/imbalanced.test.conll\npred = fixtures/imbalanced.test.conll\n"
                              "catalog = fixtures/catalog.txt\n",
                              data_dir().c_str(), out.c_str(), &report.p) == SOMD_OK);
  CHECK(report.s().find("\"config_hash\"") != std::string::npos);

  Str tsv;
  size_t failed = 99;
  REQUIRE(somd_run_grid("catalog = fixtures/catalog.txt\ntest = fixtures/imbalanced.test.conll\n"
                        "[experiment]\npred = fixtures/imbalanced.test.conll\n"
                        "[experiment]\npred = fixtures/absent.conll\n",
                        data_dir().c_str(), out.c_str(), &tsv.p, &failed) == SOMD_OK);
  CHECK(failed == 1);
  CHECK(tsv.s().find("FileNotFound") != std::string::npos);
  std::filesystem::remove_all(out);
}
