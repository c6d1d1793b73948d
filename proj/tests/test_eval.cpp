#include <doctest.h>

#include <random>

#include <json.hpp>

#include "somd/error.hpp"
#include "somd/eval.hpp"
#include "support.hpp"

using namespace somd;
using namespace somd::testing;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::Internal;
}

const LabelSet& labels() {
  static const LabelCatalog c = LabelCatalog::defaults();
  return c.composites();
}

Dataset random_corpus(std::mt19937_64& rng) {
  Dataset d{{}, labels()};
  const std::size_t n = 1 + rng() % 6;
  for (std::size_t i = 0; i < n; ++i) d.sentences.push_back(random_sentence(rng, 12, labels(), 0.4));
  return d;
}

// Same tokens, independently drawn (possibly invalid) tags.
Dataset noisy_prediction(std::mt19937_64& rng, const Dataset& gold) {
  Dataset p = gold;
  for (auto& s : p.sentences) {
    switch (rng() % 3) {
      case 0: break;
      case 1: s.tags = random_valid_tags(rng, s.size(), labels(), 0.4); break;
      default: s.tags = random_raw_tags(rng, s.size(), labels()); break;
    }
  }
  return p;
}

}  // namespace

TEST_CASE("usage-versus-mention confusion fixture") {
  const Dataset gold = load_fixture("confusion.gold.conll");
  const Dataset pred = load_fixture("confusion.pred.conll");
  const EvalReport r = exact_match_score(gold, pred);
  CHECK(r.micro == Counts{6, 5, 2});
  CHECK(r.micro.precision() == doctest::Approx(0.4));
  CHECK(r.micro.recall() == doctest::Approx(1.0 / 3.0));
  CHECK(r.micro.f1() == doctest::Approx(0.3636).epsilon(1e-4));
  CHECK(r.repairs_applied == 0);
  CHECK(r.per_class.at("OperatingSystem_Mention") == Counts{4, 1, 1});
  CHECK(r.per_class.at("OperatingSystem_Usage") == Counts{0, 3, 0});
  CHECK(r.per_class.at("PlugIn_Mention") == Counts{1, 0, 0});
  const std::vector<Confusion> expected{{"OperatingSystem_Mention", "OperatingSystem_Usage", 3}};
  CHECK(r.confusions == expected);
  CHECK(confusion_pairs(gold, pred) == expected);
}

TEST_CASE("multi-token fixture repairs the prediction before scoring") {
  const Dataset gold = load_fixture("multitoken.gold.conll");
  const Dataset pred = load_fixture("multitoken.pred.conll", LabelCatalog::defaults(), ParseMode::Lenient);
  const EvalReport r = exact_match_score(gold, pred);
  // The six-token gold span is cut into two predicted spans, neither exact.
  CHECK(r.micro == Counts{1, 2, 0});
  CHECK(r.repairs_applied == 1);
  CHECK(r.micro.f1() == 0.0);
  CHECK(r.confusions.empty());
}

TEST_CASE("degenerate scores") {
  const Dataset gold = load_fixture("confusion.gold.conll");
  const EvalReport same = exact_match_score(gold, gold);
  CHECK(same.micro.precision() == 1.0);
  CHECK(same.micro.recall() == 1.0);
  CHECK(same.micro.f1() == 1.0);
  CHECK(confusion_pairs(gold, gold).empty());

  Dataset all_o = gold;
  for (Tag& t : all_o.sentences[0].tags) t = Tag::outside();
  const EvalReport none = exact_match_score(gold, all_o);
  CHECK(none.micro.precision() == 0.0);
  CHECK(none.micro.recall() == 0.0);
  CHECK(none.micro.f1() == 0.0);

  Dataset shifted = gold;
  shifted.sentences[0].tags.assign(gold.sentences[0].size(), Tag::outside());
  shifted.sentences[0].tags[3] = Tag::begin("Package_Usage");
  CHECK(confusion_pairs(gold, shifted).empty());
}

TEST_CASE("score inputs must be parallel") {
  const Dataset gold = load_fixture("confusion.gold.conll");
  Dataset two = gold;
  two.sentences.push_back(gold.sentences[0]);
  CHECK(code_of([&] { exact_match_score(gold, two); }) == ErrorCode::SentenceCountMismatch);
  CHECK(code_of([&] { confusion_pairs(gold, two); }) == ErrorCode::SentenceCountMismatch);
  Dataset renamed = gold;
  renamed.sentences[0].tokens[0] = "Changed";
  CHECK(code_of([&] { exact_match_score(gold, renamed); }) == ErrorCode::TokenMismatch);
}

TEST_CASE("report rendering") {
  const EvalReport r = exact_match_score(load_fixture("confusion.gold.conll"),
                                         load_fixture("confusion.pred.conll"));
  const auto j = nlohmann::json::parse(r.to_json());
  CHECK(j.at("micro").at("match_count") == 2);
  CHECK(j.at("micro").at("precision").get<double>() == doctest::Approx(0.4));
  CHECK(j.contains("per_class"));
  CHECK(j.at("repairs_applied") == 0);
  CHECK(j.at("confusions").size() == 1);
  CHECK(nlohmann::json::parse(r.to_json(false)).at("per_class").empty());
  const std::string table = r.to_table();
  CHECK(table.find("OperatingSystem_Mention") != std::string::npos);
  CHECK(table.find("0.4000") != std::string::npos);
}

TEST_CASE("scoring properties") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 300; ++trial) {
    const Dataset gold = random_corpus(rng);
    const Dataset pred = noisy_prediction(rng, gold);
    const EvalReport r = exact_match_score(gold, pred);
    const OracleCounts o = oracle_score(gold, pred);
    CHECK(r.micro.gold == o.gold);
    CHECK(r.micro.pred == o.pred);
    CHECK(r.micro.match == o.match);

    Counts sum;
    for (const auto& [label, c] : r.per_class) {
      CHECK(c.match <= std::min(c.gold, c.pred));
      sum += c;
    }
    CHECK(sum == r.micro);

    // Swap symmetry, on a valid prediction so both sides are gold-eligible.
    Dataset valid = pred;
    for (auto& s : valid.sentences) s.tags = repair_iob2(s.tags);
    const EvalReport ab = exact_match_score(gold, valid);
    const EvalReport ba = exact_match_score(valid, gold);
    CHECK(ab.micro.precision() == ba.micro.recall());
    CHECK(ab.micro.recall() == ba.micro.precision());
    CHECK(ab.micro.f1() == doctest::Approx(ba.micro.f1()));

    // Adding one missed gold span to the prediction never lowers F1.
    for (std::size_t s = 0; s < gold.size(); ++s) {
      const auto gold_spans = tags_to_spans(gold.sentences[s].tags);
      const auto pred_spans = tags_to_spans(valid.sentences[s].tags);
      for (const Span& g : gold_spans) {
        bool overlaps = false;
        for (const Span& p : pred_spans) overlaps |= !(p.end < g.start || g.end < p.start);
        if (overlaps) continue;
        Dataset better = valid;
        auto spans = pred_spans;
        spans.push_back(g);
        better.sentences[s].tags = spans_to_tags(spans, gold.sentences[s].size());
        CHECK(exact_match_score(gold, better).micro.f1() >= ab.micro.f1());
        break;
      }
    }
  }
}
