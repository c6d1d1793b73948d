#include "somd/corpus.hpp"

#include <algorithm>
#include <set>

#include <json.hpp>

#include "somd/error.hpp"
#include "somd/text.hpp"

namespace somd {

std::string Tag::str() const {
  switch (kind) {
    case TagKind::O:
      return "O";
    case TagKind::B:
      return "B-" + label;
    case TagKind::I:
      return "I-" + label;
  }
  return "O";
}

std::optional<Tag> parse_tag(std::string_view text) {
  if (text == "O") return Tag::outside();
  if (text.size() < 3 || text[1] != '-') return std::nullopt;
  std::string label(text.substr(2));
  if (text[0] == 'B') return Tag::begin(std::move(label));
  if (text[0] == 'I') return Tag::inside(std::move(label));
  return std::nullopt;
}

LabelSet::LabelSet(std::vector<std::string> labels) : labels_(std::move(labels)) {
  std::set<std::string_view> seen;
  for (const auto& label : labels_) {
    if (label.empty() || has_whitespace(label))
      throw Error(ErrorCode::InvalidConfig, "invalid label '" + label + "'");
    if (!seen.insert(label).second)
      throw Error(ErrorCode::InvalidConfig, "duplicate label '" + label + "'");
  }
}

bool LabelSet::contains(std::string_view label) const {
  return index_of(label).has_value();
}

std::optional<std::size_t> LabelSet::index_of(std::string_view label) const {
  auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - labels_.begin());
}

std::vector<Tag> LabelSet::tag_space() const {
  std::vector<Tag> tags;
  tags.reserve(1 + 2 * labels_.size());
  tags.push_back(Tag::outside());
  for (const auto& label : labels_) {
    tags.push_back(Tag::begin(label));
    tags.push_back(Tag::inside(label));
  }
  return tags;
}

namespace {

void check_type_names(const std::vector<std::string>& names, const char* what) {
  if (names.empty())
    throw Error(ErrorCode::InvalidConfig, std::string("catalog has no ") + what + " types");
  for (const auto& name : names) {
    if (name.find('_') != std::string::npos)
      throw Error(ErrorCode::InvalidConfig,
                  std::string(what) + " type '" + name + "' contains an underscore");
  }
}

}  // namespace

LabelCatalog::LabelCatalog(std::vector<std::string> software_types,
                           std::vector<std::string> mention_types) {
  check_type_names(software_types, "software");
  check_type_names(mention_types, "mention");
  software_ = LabelSet(software_types);
  mention_ = LabelSet(mention_types);
  std::vector<std::string> composites;
  composites.reserve(software_types.size() * mention_types.size());
  for (const auto& s : software_types)
    for (const auto& m : mention_types) composites.push_back(s + "_" + m);
  composites_ = LabelSet(std::move(composites));
}

LabelCatalog LabelCatalog::defaults() {
  return LabelCatalog({"Application", "PlugIn", "OperatingSystem",
                       "ProgrammingEnvironment", "Package", "SoftwareCoreference"},
                      {"Mention", "Usage", "Creation", "Deposition"});
}

LabelCatalog LabelCatalog::parse(std::string_view text) {
  std::vector<std::string> software;
  std::vector<std::string> mention;
  std::vector<std::string>* section = nullptr;
  std::size_t line_no = 0;
  for (std::string_view line : split_lines(text)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    if (line == "software:") {
      section = &software;
    } else if (line == "mention:") {
      section = &mention;
    } else if (section == nullptr) {
      throw Error(ErrorCode::InvalidConfig,
                  "catalog line " + std::to_string(line_no) +
                      ": type name outside a 'software:' or 'mention:' section");
    } else {
      section->emplace_back(line);
    }
  }
  return LabelCatalog(std::move(software), std::move(mention));
}

std::string LabelCatalog::to_text() const {
  std::string out = "software:\n";
  for (const auto& s : software_.labels()) out += s + "\n";
  out += "mention:\n";
  for (const auto& m : mention_.labels()) out += m + "\n";
  return out;
}

const std::string& LabelCatalog::default_mention_type() const {
  if (auto idx = mention_.index_of("Mention")) return mention_.labels()[*idx];
  return mention_.labels().front();
}

void check_sentence(const TaggedSentence& sentence) {
  if (sentence.tokens.empty())
    throw Error(ErrorCode::EmptySentence, "sentence has no tokens");
  if (sentence.tokens.size() != sentence.tags.size())
    throw Error(ErrorCode::LengthMismatch, "sentence has " +
                                               std::to_string(sentence.tokens.size()) +
                                               " tokens but " +
                                               std::to_string(sentence.tags.size()) + " tags");
  for (const auto& token : sentence.tokens) {
    if (token.empty() || has_whitespace(token))
      throw Error(ErrorCode::MalformedLine, "token '" + token + "' is empty or contains whitespace");
  }
}

Dataset concat(const Dataset& a, const Dataset& b) {
  if (!(a.labels == b.labels))
    throw Error(ErrorCode::IncompatibleTagSet, "cannot concatenate datasets over different label sets");
  Dataset out{a.sentences, a.labels};
  out.sentences.insert(out.sentences.end(), b.sentences.begin(), b.sentences.end());
  return out;
}

std::string Violation::describe(std::span<const Tag> tags) const {
  const std::string here = index < tags.size() ? tags[index].str() : "?";
  if (kind == ViolationKind::OrphanInside)
    return "position " + std::to_string(index) + ": " + here +
           " does not continue a span";
  const std::string prev = index > 0 && index - 1 < tags.size() ? tags[index - 1].str() : "?";
  return "position " + std::to_string(index) + ": " + here + " follows " + prev +
         " with a different label";
}

std::vector<Violation> validate_iob2(std::span<const Tag> tags) {
  std::vector<Violation> out;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    if (tags[i].kind != TagKind::I) continue;
    if (i == 0 || tags[i - 1].is_outside()) {
      out.push_back({i, ViolationKind::OrphanInside});
    } else if (tags[i - 1].label != tags[i].label) {
      out.push_back({i, ViolationKind::LabelMismatch});
    }
  }
  return out;
}

bool is_valid_iob2(std::span<const Tag> tags) {
  for (std::size_t i = 0; i < tags.size(); ++i) {
    if (tags[i].kind != TagKind::I) continue;
    if (i == 0 || tags[i - 1].is_outside() || tags[i - 1].label != tags[i].label)
      return false;
  }
  return true;
}

std::vector<Tag> repair_iob2(std::span<const Tag> tags, std::size_t* repairs) {
  std::vector<Tag> out(tags.begin(), tags.end());
  std::size_t n = 0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i].kind != TagKind::I) continue;
    // Compare against the already repaired predecessor so one pass suffices.
    if (i == 0 || out[i - 1].is_outside() || out[i - 1].label != out[i].label) {
      out[i].kind = TagKind::B;
      ++n;
    }
  }
  if (repairs != nullptr) *repairs = n;
  return out;
}

std::vector<Span> tags_to_spans(std::span<const Tag> tags) {
  std::vector<Span> spans;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    switch (tags[i].kind) {
      case TagKind::O:
        break;
      case TagKind::B:
        spans.push_back({i, i, tags[i].label});
        break;
      case TagKind::I:
        if (i == 0 || tags[i - 1].is_outside() || tags[i - 1].label != tags[i].label ||
            spans.empty() || spans.back().end != i - 1)
          throw Error(ErrorCode::InvalidIOB2,
                      Violation{i, (i == 0 || tags[i - 1].is_outside())
                                       ? ViolationKind::OrphanInside
                                       : ViolationKind::LabelMismatch}
                          .describe(tags));
        spans.back().end = i;
        break;
    }
  }
  return spans;
}

std::vector<Tag> spans_to_tags(std::span<const Span> spans, std::size_t length) {
  std::vector<Span> sorted(spans.begin(), spans.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<Tag> tags(length);
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    const Span& s = sorted[k];
    if (s.start > s.end || s.end >= length)
      throw Error(ErrorCode::SpanOutOfRange,
                  "span (" + std::to_string(s.start) + "," + std::to_string(s.end) +
                      ") outside [0," + std::to_string(length) + ")");
    if (k > 0 && sorted[k - 1].end >= s.start)
      throw Error(ErrorCode::OverlappingSpans,
                  "spans starting at " + std::to_string(sorted[k - 1].start) + " and " +
                      std::to_string(s.start) + " overlap");
    tags[s.start] = Tag::begin(s.label);
    for (std::size_t i = s.start + 1; i <= s.end; ++i) tags[i] = Tag::inside(s.label);
  }
  return tags;
}

ParseResult parse_conll(std::string_view text, const LabelSet& labels, ParseMode mode) {
  ParseResult result;
  result.dataset.labels = labels;

  TaggedSentence current;
  std::size_t first_line = 0;
  std::size_t line_no = 0;

  auto flush = [&] {
    if (current.tokens.empty()) return;
    const std::size_t index = result.dataset.sentences.size();
    for (const Violation& v : validate_iob2(current.tags)) {
      std::string message = v.describe(current.tags);
      const std::size_t at = first_line + v.index;
      if (mode == ParseMode::Strict)
        throw Error(ErrorCode::InvalidIOB2,
                    "line " + std::to_string(at) + ": " + message);
      result.violations.push_back({index, at, v, std::move(message)});
    }
    result.dataset.sentences.push_back(std::move(current));
    current = {};
  };

  for (std::string_view line : split_lines(text)) {
    ++line_no;
    if (trim(line).empty()) {
      flush();
      continue;
    }
    const auto fields = split(line, '\t');
    if (fields.size() != 2)
      throw Error(ErrorCode::MalformedLine,
                  "line " + std::to_string(line_no) + ": expected 2 tab-separated columns, got " +
                      std::to_string(fields.size()));
    if (fields[0].empty() || has_whitespace(fields[0]))
      throw Error(ErrorCode::MalformedLine,
                  "line " + std::to_string(line_no) + ": token is empty or contains whitespace");
    auto tag = parse_tag(fields[1]);
    if (!tag)
      throw Error(ErrorCode::MalformedLine,
                  "line " + std::to_string(line_no) + ": malformed tag '" +
                      std::string(fields[1]) + "'");
    if (!tag->is_outside() && !labels.contains(tag->label))
      throw Error(ErrorCode::UnknownLabel,
                  "line " + std::to_string(line_no) + ": unknown label '" + tag->label + "'");
    if (current.tokens.empty()) first_line = line_no;
    current.tokens.emplace_back(fields[0]);
    current.tags.push_back(std::move(*tag));
  }
  flush();

  if (result.dataset.sentences.empty())
    throw Error(ErrorCode::EmptySentence, "input contains no sentences");
  return result;
}

std::string serialize_conll(const Dataset& dataset) {
  std::string out;
  for (std::size_t s = 0; s < dataset.sentences.size(); ++s) {
    if (s > 0) out += '\n';
    const auto& sentence = dataset.sentences[s];
    for (std::size_t i = 0; i < sentence.size(); ++i) {
      out += sentence.tokens[i];
      out += '\t';
      out += sentence.tags[i].str();
      out += '\n';
    }
  }
  return out;
}

std::vector<std::vector<std::string>> parse_token_blocks(std::string_view text) {
  std::vector<std::vector<std::string>> blocks;
  std::vector<std::string> current;
  std::size_t line_no = 0;
  for (std::string_view line : split_lines(text)) {
    ++line_no;
    if (trim(line).empty()) {
      if (!current.empty()) blocks.push_back(std::move(current));
      current = {};
      continue;
    }
    auto token = split(line, '\t').front();
    if (token.empty() || has_whitespace(token))
      throw Error(ErrorCode::MalformedLine,
                  "line " + std::to_string(line_no) + ": token is empty or contains whitespace");
    current.emplace_back(token);
  }
  if (!current.empty()) blocks.push_back(std::move(current));
  if (blocks.empty()) throw Error(ErrorCode::EmptySentence, "input contains no sentences");
  return blocks;
}

bool has_mention(const TaggedSentence& sentence) {
  return std::any_of(sentence.tags.begin(), sentence.tags.end(),
                     [](const Tag& t) { return !t.is_outside(); });
}

std::size_t StatsReport::total_tokens() const {
  std::size_t n = 0;
  for (const auto& [tag, count] : token_counts) n += count;
  return n;
}

double StatsReport::o_fraction() const {
  const std::size_t total = total_tokens();
  if (total == 0) return 0.0;
  auto it = token_counts.find("O");
  const std::size_t o = it == token_counts.end() ? 0 : it->second;
  return static_cast<double>(o) / static_cast<double>(total);
}

StatsReport& StatsReport::operator+=(const StatsReport& other) {
  for (const auto& [k, v] : other.token_counts) token_counts[k] += v;
  for (const auto& [k, v] : other.span_counts) span_counts[k] += v;
  sentences_all_o += other.sentences_all_o;
  sentences_with_mention += other.sentences_with_mention;
  return *this;
}

std::string StatsReport::to_json() const {
  nlohmann::json j;
  j["token_counts"] = token_counts;
  j["span_counts"] = span_counts;
  j["sentences_all_o"] = sentences_all_o;
  j["sentences_with_mention"] = sentences_with_mention;
  j["o_fraction"] = o_fraction();
  return j.dump(2) + "\n";
}

StatsReport dataset_stats(const Dataset& dataset) {
  StatsReport report;
  for (const Tag& t : dataset.labels.tag_space()) report.token_counts[t.str()] = 0;
  for (const auto& label : dataset.labels.labels()) report.span_counts[label] = 0;
  for (const auto& sentence : dataset.sentences) {
    for (const Tag& t : sentence.tags) ++report.token_counts[t.str()];
    for (const Span& s : tags_to_spans(repair_iob2(sentence.tags))) ++report.span_counts[s.label];
    if (has_mention(sentence))
      ++report.sentences_with_mention;
    else
      ++report.sentences_all_o;
  }
  return report;
}

}  // namespace somd
