#include <doctest.h>

#include <random>

#include "somd/duallabel.hpp"
#include "somd/error.hpp"
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

const LabelCatalog& catalog() {
  static const LabelCatalog c = LabelCatalog::defaults();
  return c;
}

Tag t(const char* text) { return *parse_tag(text); }

}  // namespace

TEST_CASE("split_label") {
  CHECK(split_label("OperatingSystem_Usage", catalog()) == CompositeLabel{"OperatingSystem", "Usage"});
  CHECK(code_of([] { split_label("Foo_Usage", catalog()); }) == ErrorCode::UnknownLabel);
  CHECK(code_of([] { split_label("Application", catalog()); }) == ErrorCode::UnknownLabel);
}

TEST_CASE("decompose examples") {
  CHECK(decompose(t("B-Application_Creation"), catalog()) ==
        std::pair{t("B-Application"), t("B-Creation")});
  CHECK(decompose(t("O"), catalog()) == std::pair{t("O"), t("O")});
  CHECK(decompose(t("I-OperatingSystem_Usage"), catalog()) ==
        std::pair{t("I-OperatingSystem"), t("I-Usage")});
  CHECK(code_of([] { decompose(t("B-Tool_Usage"), catalog()); }) == ErrorCode::UnknownLabel);
}

TEST_CASE("compose examples") {
  CHECK(compose(t("B-Application"), t("B-Mention"), MergePolicy::Strict, catalog()) ==
        t("B-Application_Mention"));
  CHECK(compose(t("B-Application"), t("O"), MergePolicy::Strict, catalog()) == t("O"));
  CHECK(compose(t("B-Application"), t("I-Usage"), MergePolicy::Strict, catalog()) == t("O"));
  CHECK(compose(t("B-Application"), t("I-Usage"), MergePolicy::SoftwarePrecedence, catalog()) ==
        t("B-Application_Mention"));
  CHECK(compose(t("I-Package"), t("O"), MergePolicy::SoftwarePrecedence, catalog()) ==
        t("I-Package_Mention"));
  CHECK(compose(t("O"), t("B-Usage"), MergePolicy::SoftwarePrecedence, catalog()) == t("O"));
  CHECK(compose(t("I-Package"), t("I-Usage"), MergePolicy::SoftwarePrecedence, catalog()) ==
        t("I-Package_Usage"));
}

TEST_CASE("merge policy names") {
  CHECK(parse_merge_policy("strict") == MergePolicy::Strict);
  CHECK(parse_merge_policy("software-precedence") == MergePolicy::SoftwarePrecedence);
  CHECK(parse_merge_policy("software_precedence") == MergePolicy::SoftwarePrecedence);
  CHECK(code_of([] { parse_merge_policy("vote"); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("split_dataset examples") {
  const Dataset ex = load_fixture("confusion.gold.conll");
  const SplitDatasets sp = split_dataset(ex, catalog());
  CHECK(sp.software.labels == catalog().software_types());
  CHECK(sp.mention.labels == catalog().mention_types());
  const auto& sw = sp.software.sentences[0];
  const auto& mn = sp.mention.sentences[0];
  CHECK(sw.tokens == ex.sentences[0].tokens);
  CHECK(sw.tags[2] == t("B-PlugIn"));
  CHECK(mn.tags[2] == t("B-Mention"));
  CHECK(std::vector<Tag>(sw.tags.begin() + 33, sw.tags.end() - 1) ==
        tags_from({"B-OperatingSystem", "I-OperatingSystem", "I-OperatingSystem"}));
  CHECK(std::vector<Tag>(mn.tags.begin() + 33, mn.tags.end() - 1) ==
        tags_from({"B-Mention", "I-Mention", "I-Mention"}));
  CHECK(is_valid_iob2(sw.tags));
  CHECK(is_valid_iob2(mn.tags));

  CHECK(merge_datasets(sp.software, sp.mention, MergePolicy::Strict, catalog()) == ex);

  Dataset all_o{{TaggedSentence{{"a", "b"}, tags_from({"O", "O"})}}, catalog().composites()};
  const SplitDatasets so = split_dataset(all_o, catalog());
  CHECK(so.software.sentences[0].tags == tags_from({"O", "O"}));
  CHECK(so.mention.sentences[0].tags == tags_from({"O", "O"}));
}

TEST_CASE("merge_predictions examples") {
  CHECK(merge_predictions(tags_from({"O", "O"}), tags_from({"B-Usage", "I-Usage"}), MergePolicy::Strict,
                          catalog()) == tags_from({"O", "O"}));
  CHECK(merge_predictions(tags_from({"B-Application"}), tags_from({"I-Usage"}),
                          MergePolicy::SoftwarePrecedence, catalog()) ==
        tags_from({"B-Application_Mention"}));
  // Strict drops the first position, leaving an orphan I- that repair turns into B-.
  CHECK(merge_predictions(tags_from({"B-Package", "I-Package"}), tags_from({"O", "I-Usage"}),
                          MergePolicy::Strict, catalog()) == tags_from({"O", "B-Package_Usage"}));
  CHECK(code_of([] {
          merge_predictions(tags_from({"O"}), tags_from({"O", "O"}), MergePolicy::Strict, catalog());
        }) == ErrorCode::LengthMismatch);
}

TEST_CASE("merge_datasets checks alignment") {
  const Dataset ex = load_fixture("confusion.gold.conll");
  const SplitDatasets sp = split_dataset(ex, catalog());
  Dataset two = sp.mention;
  two.sentences.push_back(two.sentences[0]);
  CHECK(code_of([&] { merge_datasets(sp.software, two, MergePolicy::Strict, catalog()); }) ==
        ErrorCode::SentenceCountMismatch);
  Dataset renamed = sp.mention;
  renamed.sentences[0].tokens[0] = "changed";
  CHECK(code_of([&] { merge_datasets(sp.software, renamed, MergePolicy::Strict, catalog()); }) ==
        ErrorCode::TokenMismatch);
}

TEST_CASE("dual-label properties") {
  for (const Tag& tag : catalog().composites().tag_space()) {
    const auto [s, m] = decompose(tag, catalog());
    CHECK(compose(s, m, MergePolicy::Strict, catalog()) == tag);
    CHECK(compose(s, m, MergePolicy::SoftwarePrecedence, catalog()) == tag);
  }
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng() % 12;
    const auto sw = random_raw_tags(rng, n, catalog().software_types());
    const auto mn = random_raw_tags(rng, n, catalog().mention_types());
    for (MergePolicy policy : {MergePolicy::Strict, MergePolicy::SoftwarePrecedence}) {
      const auto merged = merge_predictions(sw, mn, policy, catalog());
      CHECK(is_valid_iob2(merged));
      if (policy == MergePolicy::Strict) {
        for (std::size_t i = 0; i < n; ++i) {
          const bool both = !sw[i].is_outside() && !mn[i].is_outside() && sw[i].kind == mn[i].kind;
          CHECK(merged[i].is_outside() == !both);
        }
      }
    }
    const TaggedSentence s = random_sentence(rng, 12, catalog().composites());
    const Dataset d{{s}, catalog().composites()};
    const SplitDatasets sp = split_dataset(d, catalog());
    CHECK(is_valid_iob2(sp.software.sentences[0].tags));
    CHECK(is_valid_iob2(sp.mention.sentences[0].tags));
    CHECK(merge_datasets(sp.software, sp.mention, MergePolicy::Strict, catalog()) == d);
  }
}
