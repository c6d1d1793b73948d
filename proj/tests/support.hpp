#pragma once

// Generators and independent oracles shared by the unit and acceptance tests.
// The oracles deliberately avoid the library's own span and scoring code.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iterator>
#include <map>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "somd/corpus.hpp"
#include "somd/text.hpp"

namespace somd::testing {

inline std::filesystem::path data_dir() { return SOMD_TEST_DATA_DIR; }
inline std::filesystem::path fixture(const std::string& name) {
  return data_dir() / "fixtures" / name;
}

inline Dataset load_fixture(const std::string& name,
                            const LabelCatalog& catalog = LabelCatalog::defaults(),
                            ParseMode mode = ParseMode::Strict) {
  return parse_conll(read_file(fixture(name)), catalog.composites(), mode).dataset;
}

inline std::vector<Tag> tags_from(std::initializer_list<const char*> texts) {
  std::vector<Tag> out;
  for (const char* t : texts) out.push_back(*parse_tag(t));
  return out;
}

// Valid IOB2 sequence of the given length: runs of O and spans of 1-4 tokens.
inline std::vector<Tag> random_valid_tags(std::mt19937_64& rng, std::size_t length,
                                          const LabelSet& labels, double span_rate = 0.3) {
  std::vector<Tag> tags;
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  while (tags.size() < length) {
    if (coin(rng) < span_rate) {
      const std::string& label = labels.labels()[rng() % labels.size()];
      const std::size_t len = std::min<std::size_t>(1 + rng() % 4, length - tags.size());
      tags.push_back(Tag::begin(label));
      for (std::size_t i = 1; i < len; ++i) tags.push_back(Tag::inside(label));
    } else {
      tags.push_back(Tag::outside());
    }
  }
  return tags;
}

// Arbitrary (possibly invalid) tag sequence.
inline std::vector<Tag> random_raw_tags(std::mt19937_64& rng, std::size_t length,
                                        const LabelSet& labels) {
  const std::vector<Tag> space = labels.tag_space();
  std::vector<Tag> tags;
  for (std::size_t i = 0; i < length; ++i)
    tags.push_back(rng() % 2 == 0 ? Tag::outside() : space[rng() % space.size()]);
  return tags;
}

inline std::string random_word(std::mt19937_64& rng, std::size_t max_len = 12) {
  static const std::string alphabet = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789-.";
  const std::size_t len = 1 + rng() % max_len;
  std::string w;
  for (std::size_t i = 0; i < len; ++i) w += alphabet[rng() % alphabet.size()];
  return w;
}

inline TaggedSentence random_sentence(std::mt19937_64& rng, std::size_t max_len,
                                      const LabelSet& labels, double span_rate = 0.3) {
  const std::size_t len = 1 + rng() % max_len;
  TaggedSentence s;
  for (std::size_t i = 0; i < len; ++i) s.tokens.push_back(random_word(rng, 8));
  s.tags = random_valid_tags(rng, len, labels, span_rate);
  return s;
}

// Spans read straight off the definition: a B opens a span, following I with
// the same label extend it.
using SpanKey = std::tuple<std::size_t, std::size_t, std::size_t, std::string>;

inline std::vector<SpanKey> oracle_spans(std::size_t sentence, const std::vector<Tag>& tags) {
  std::vector<SpanKey> out;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    if (tags[i].kind != TagKind::B) continue;
    std::size_t j = i;
    while (j + 1 < tags.size() && tags[j + 1].kind == TagKind::I &&
           tags[j + 1].label == tags[i].label)
      ++j;
    out.emplace_back(sentence, i, j, tags[i].label);
  }
  return out;
}

// Per-sentence I->B rewrite written independently of repair_iob2.
inline std::vector<Tag> oracle_repair(std::vector<Tag> tags) {
  for (std::size_t i = 0; i < tags.size(); ++i) {
    if (tags[i].kind != TagKind::I) continue;
    const bool continues = i > 0 && tags[i - 1].kind != TagKind::O &&
                           tags[i - 1].label == tags[i].label;
    if (!continues) tags[i].kind = TagKind::B;
  }
  return tags;
}

struct OracleCounts {
  std::size_t gold = 0, pred = 0, match = 0;
};

// Materializes both span multisets and intersects them.
inline OracleCounts oracle_score(const Dataset& gold, const Dataset& pred) {
  std::multiset<SpanKey> g, p;
  for (std::size_t s = 0; s < gold.size(); ++s) {
    for (auto& k : oracle_spans(s, gold.sentences[s].tags)) g.insert(k);
    for (auto& k : oracle_spans(s, oracle_repair(pred.sentences[s].tags))) p.insert(k);
  }
  OracleCounts c{g.size(), p.size(), 0};
  std::vector<SpanKey> common;
  std::set_intersection(g.begin(), g.end(), p.begin(), p.end(), std::back_inserter(common));
  c.match = common.size();
  return c;
}

}  // namespace somd::testing
