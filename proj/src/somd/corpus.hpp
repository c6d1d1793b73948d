#pragma once

// IOB2 corpus model: tags, label sets, the two-column CoNLL format and span
// conversion.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace somd {

enum class TagKind : std::uint8_t { O, B, I };

struct Tag {
  TagKind kind = TagKind::O;
  std::string label;  // empty iff kind == O

  static Tag outside() { return {}; }
  static Tag begin(std::string label) { return {TagKind::B, std::move(label)}; }
  static Tag inside(std::string label) { return {TagKind::I, std::move(label)}; }

  bool is_outside() const noexcept { return kind == TagKind::O; }
  std::string str() const;

  friend bool operator==(const Tag&, const Tag&) = default;
};

// Accepts "O", "B-<label>" and "I-<label>" with a non-empty label.
std::optional<Tag> parse_tag(std::string_view text);

/// Ordered closed set of span labels. The order fixes the tag space used by
/// the tagger (O first, then B-/I- per label) and therefore tie-breaking.
class LabelSet {
 public:
  LabelSet() = default;
  explicit LabelSet(std::vector<std::string> labels);

  const std::vector<std::string>& labels() const noexcept { return labels_; }
  std::size_t size() const noexcept { return labels_.size(); }
  bool contains(std::string_view label) const;
  std::optional<std::size_t> index_of(std::string_view label) const;

  /// O, B-l0, I-l0, B-l1, I-l1, ...
  std::vector<Tag> tag_space() const;

  friend bool operator==(const LabelSet&, const LabelSet&) = default;

 private:
  std::vector<std::string> labels_;
};

/// Software types crossed with mention types; composites are
/// "{software}_{mention}" in software-major order.
class LabelCatalog {
 public:
  LabelCatalog(std::vector<std::string> software_types,
               std::vector<std::string> mention_types);

  static LabelCatalog defaults();

  // "software:" and "mention:" sections, one type name per line. Blank lines
  // and lines starting with '#' are skipped.
  static LabelCatalog parse(std::string_view text);
  std::string to_text() const;

  const LabelSet& software_types() const noexcept { return software_; }
  const LabelSet& mention_types() const noexcept { return mention_; }
  const LabelSet& composites() const noexcept { return composites_; }

  // "Mention" when the catalog has it, otherwise the first mention type.
  const std::string& default_mention_type() const;

 private:
  LabelSet software_;
  LabelSet mention_;
  LabelSet composites_;
};

struct TaggedSentence {
  std::vector<std::string> tokens;
  std::vector<Tag> tags;

  std::size_t size() const noexcept { return tokens.size(); }
  friend bool operator==(const TaggedSentence&, const TaggedSentence&) = default;
};

// Throws EmptySentence / LengthMismatch / MalformedLine when the structural
// invariants (non-empty, equal lengths, whitespace-free tokens) do not hold.
void check_sentence(const TaggedSentence& sentence);

struct Span {
  std::size_t start = 0;
  std::size_t end = 0;  // inclusive
  std::string label;

  friend auto operator<=>(const Span&, const Span&) = default;
};

struct Dataset {
  std::vector<TaggedSentence> sentences;
  LabelSet labels;

  std::size_t size() const noexcept { return sentences.size(); }
  friend bool operator==(const Dataset&, const Dataset&) = default;
};

Dataset concat(const Dataset& a, const Dataset& b);

enum class ViolationKind { OrphanInside, LabelMismatch };

struct Violation {
  std::size_t index = 0;
  ViolationKind kind = ViolationKind::OrphanInside;

  std::string describe(std::span<const Tag> tags) const;
  friend bool operator==(const Violation&, const Violation&) = default;
};

struct CorpusViolation {
  std::size_t sentence = 0;
  std::size_t line = 0;  // 1-based line in the source text
  Violation violation;
  std::string message;
};

enum class ParseMode { Strict, Lenient };

struct ParseResult {
  Dataset dataset;
  std::vector<CorpusViolation> violations;  // always empty in strict mode
};

ParseResult parse_conll(std::string_view text, const LabelSet& labels,
                        ParseMode mode = ParseMode::Strict);
std::string serialize_conll(const Dataset& dataset);

/// Token blocks for unlabeled input: the first column of each line is the
/// token, further columns are ignored.
std::vector<std::vector<std::string>> parse_token_blocks(std::string_view text);

std::vector<Violation> validate_iob2(std::span<const Tag> tags);
bool is_valid_iob2(std::span<const Tag> tags);

/// Rewrites every I- tag that does not continue a same-label span to B-.
/// `repairs`, when given, receives the number of rewritten positions.
std::vector<Tag> repair_iob2(std::span<const Tag> tags,
                             std::size_t* repairs = nullptr);

std::vector<Span> tags_to_spans(std::span<const Tag> tags);
std::vector<Tag> spans_to_tags(std::span<const Span> spans, std::size_t length);

bool has_mention(const TaggedSentence& sentence);

struct StatsReport {
  std::map<std::string, std::size_t> token_counts;  // per tag string
  std::map<std::string, std::size_t> span_counts;   // per label
  std::size_t sentences_all_o = 0;
  std::size_t sentences_with_mention = 0;

  std::size_t total_tokens() const;
  double o_fraction() const;
  StatsReport& operator+=(const StatsReport& other);
  std::string to_json() const;

  friend bool operator==(const StatsReport&, const StatsReport&) = default;
};

StatsReport dataset_stats(const Dataset& dataset);

}  // namespace somd
