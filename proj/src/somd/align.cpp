#include "somd/align.hpp"

#include <charconv>

#include "somd/error.hpp"
#include "somd/text.hpp"

namespace somd {

std::vector<std::size_t> WordPieceMap::first_pieces() const {
  std::vector<std::size_t> firsts;
  firsts.reserve(words.size());
  for (std::size_t p = 0; p < word_of_piece.size(); ++p) {
    if (p == 0 || word_of_piece[p] != word_of_piece[p - 1]) firsts.push_back(p);
  }
  return firsts;
}

const char* strategy_name(AlignStrategy strategy) noexcept {
  return strategy == AlignStrategy::Unified ? "unified" : "selective";
}

AlignStrategy parse_strategy(std::string_view name) {
  if (name == "unified") return AlignStrategy::Unified;
  if (name == "selective") return AlignStrategy::Selective;
  throw Error(ErrorCode::InvalidConfig, "unknown labeling strategy '" + std::string(name) + "'");
}

namespace {

// Byte offsets at which UTF-8 code points start (continuation bytes are
// 10xxxxxx).
std::vector<std::size_t> code_point_starts(std::string_view word) {
  std::vector<std::size_t> starts;
  for (std::size_t i = 0; i < word.size(); ++i) {
    if ((static_cast<unsigned char>(word[i]) & 0xC0) != 0x80 || starts.empty())
      starts.push_back(i);
  }
  return starts;
}

std::string_view strip_marker(std::string_view piece) {
  if (piece.substr(0, kContinuationMarker.size()) == kContinuationMarker)
    piece.remove_prefix(kContinuationMarker.size());
  return piece;
}

}  // namespace

WordPieceMap segment_words(std::span<const std::string> words, const SegmenterConfig& config) {
  if (config.chunk == 0) throw Error(ErrorCode::InvalidConfig, "segmenter chunk must be >= 1");
  WordPieceMap map;
  map.words.assign(words.begin(), words.end());
  for (std::size_t w = 0; w < words.size(); ++w) {
    const std::string& word = words[w];
    const auto starts = code_point_starts(word);
    if (starts.empty()) {
      map.pieces.push_back(word);
      map.word_of_piece.push_back(w);
      continue;
    }
    for (std::size_t k = 0; k < starts.size(); k += config.chunk) {
      const std::size_t end = k + config.chunk < starts.size() ? starts[k + config.chunk] : word.size();
      std::string piece = k == 0 ? std::string() : std::string(kContinuationMarker);
      piece.append(word, starts[k], end - starts[k]);
      map.pieces.push_back(std::move(piece));
      map.word_of_piece.push_back(w);
    }
  }
  return map;
}

void check_piece_map(const WordPieceMap& map) {
  if (map.pieces.size() != map.word_of_piece.size())
    throw Error(ErrorCode::LengthMismatch, "piece map has " + std::to_string(map.pieces.size()) +
                                               " pieces but " +
                                               std::to_string(map.word_of_piece.size()) +
                                               " word indices");
  // Order is checked over the whole map first, so a decreasing index is
  // reported as such even when the map also starts past word 0.
  for (std::size_t p = 1; p < map.word_of_piece.size(); ++p) {
    const std::size_t w = map.word_of_piece[p];
    if (w < map.word_of_piece[p - 1])
      throw Error(ErrorCode::NonMonotoneWordIndex,
                  "piece " + std::to_string(p) + " has word index " + std::to_string(w) +
                      " after " + std::to_string(map.word_of_piece[p - 1]));
  }
  std::size_t expected = 0;
  for (std::size_t p = 0; p < map.word_of_piece.size(); ++p) {
    const std::size_t w = map.word_of_piece[p];
    if (w > expected)
      throw Error(ErrorCode::GapInWordIndices,
                  "piece " + std::to_string(p) + " skips to word " + std::to_string(w) +
                      " (expected " + std::to_string(expected) + ")");
    if (w == expected) ++expected;
  }
  if (expected != map.words.size())
    throw Error(ErrorCode::GapInWordIndices, "piece map covers " + std::to_string(expected) +
                                                 " of " + std::to_string(map.words.size()) +
                                                 " words");
}

std::vector<WordPieceMap> import_piece_maps(std::string_view text,
                                            std::span<const TaggedSentence> sentences) {
  std::vector<WordPieceMap> maps;
  WordPieceMap current;
  std::size_t line_no = 0;

  auto flush = [&] {
    if (current.pieces.empty()) return;
    if (maps.size() >= sentences.size())
      throw Error(ErrorCode::LengthMismatch, "piece map has more blocks than the corpus has sentences");
    current.words = sentences[maps.size()].tokens;
    check_piece_map(current);
    maps.push_back(std::move(current));
    current = {};
  };

  for (std::string_view line : split_lines(text)) {
    ++line_no;
    if (trim(line).empty()) {
      flush();
      continue;
    }
    const auto fields = split(line, '\t');
    std::size_t index = 0;
    const auto field = fields.size() == 2 ? fields[1] : std::string_view{};
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), index);
    if (fields.size() != 2 || fields[0].empty() || ec != std::errc() ||
        ptr != field.data() + field.size())
      throw Error(ErrorCode::MalformedLine,
                  "piece map line " + std::to_string(line_no) + ": expected 'piece<TAB>word_index'");
    current.pieces.emplace_back(fields[0]);
    current.word_of_piece.push_back(index);
  }
  flush();
  if (maps.size() != sentences.size())
    throw Error(ErrorCode::LengthMismatch, "piece map has " + std::to_string(maps.size()) +
                                               " blocks for " + std::to_string(sentences.size()) +
                                               " sentences");
  return maps;
}

namespace {

void check_compatible(const TaggedSentence& sentence, const WordPieceMap& map) {
  if (map.words.size() != sentence.tokens.size())
    throw Error(ErrorCode::LengthMismatch, "piece map has " + std::to_string(map.words.size()) +
                                               " words, sentence has " +
                                               std::to_string(sentence.tokens.size()));
  if (map.words != sentence.tokens)
    throw Error(ErrorCode::LengthMismatch, "piece map words differ from sentence tokens");
  if (map.pieces.size() != map.word_of_piece.size())
    throw Error(ErrorCode::LengthMismatch, "piece map is inconsistent");
}

}  // namespace

AlignedSequence align_unified(const TaggedSentence& sentence, const WordPieceMap& map,
                              bool bi_conversion) {
  check_compatible(sentence, map);
  AlignedSequence out{map.pieces, {}, AlignStrategy::Unified};
  out.targets.reserve(map.pieces.size());
  for (std::size_t p = 0; p < map.pieces.size(); ++p) {
    Tag tag = sentence.tags[map.word_of_piece[p]];
    const bool continuation = p > 0 && map.word_of_piece[p] == map.word_of_piece[p - 1];
    if (bi_conversion && continuation && tag.kind == TagKind::B) tag.kind = TagKind::I;
    out.targets.emplace_back(std::move(tag));
  }
  return out;
}

AlignedSequence align_selective(const TaggedSentence& sentence, const WordPieceMap& map) {
  check_compatible(sentence, map);
  AlignedSequence out{map.pieces, {}, AlignStrategy::Selective};
  out.targets.reserve(map.pieces.size());
  for (std::size_t p = 0; p < map.pieces.size(); ++p) {
    const bool first = p == 0 || map.word_of_piece[p] != map.word_of_piece[p - 1];
    if (first)
      out.targets.emplace_back(sentence.tags[map.word_of_piece[p]]);
    else
      out.targets.emplace_back(std::nullopt);
  }
  return out;
}

AlignedSequence align(const TaggedSentence& sentence, const WordPieceMap& map,
                      AlignStrategy strategy, bool bi_conversion) {
  return strategy == AlignStrategy::Unified ? align_unified(sentence, map, bi_conversion)
                                            : align_selective(sentence, map);
}

std::vector<Tag> project_to_words(std::span<const Tag> piece_predictions,
                                  const WordPieceMap& map) {
  if (piece_predictions.size() != map.pieces.size())
    throw Error(ErrorCode::LengthMismatch, std::to_string(piece_predictions.size()) +
                                               " piece predictions for " +
                                               std::to_string(map.pieces.size()) + " pieces");
  std::vector<Tag> words;
  words.reserve(map.words.size());
  for (std::size_t p : map.first_pieces()) words.push_back(piece_predictions[p]);
  if (words.size() != map.words.size())
    throw Error(ErrorCode::LengthMismatch, "piece map does not cover every word");
  return repair_iob2(words);
}

std::string format_alignment(const AlignedSequence& aligned, const WordPieceMap& map) {
  std::string out;
  for (std::size_t p = 0; p < aligned.pieces.size(); ++p) {
    out += aligned.pieces[p];
    out += '\t';
    out += std::to_string(map.word_of_piece[p]);
    out += '\t';
    out += aligned.targets[p] ? aligned.targets[p]->str() : std::string("IGNORE");
    out += '\n';
  }
  return out;
}

std::string rejoin_word(const WordPieceMap& map, std::size_t word) {
  std::string out;
  for (std::size_t p = 0; p < map.pieces.size(); ++p) {
    if (map.word_of_piece[p] != word) continue;
    out += out.empty() ? std::string_view(map.pieces[p]) : strip_marker(map.pieces[p]);
  }
  return out;
}

}  // namespace somd
