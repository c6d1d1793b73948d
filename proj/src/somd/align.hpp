#pragma once

// Word -> subtoken segmentation and the two label alignment strategies
// (unified: every piece carries the word's tag; selective: only the first
// piece does, the rest are ignored by the loss).

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "somd/corpus.hpp"

namespace somd {

inline constexpr std::string_view kContinuationMarker = "##";

struct WordPieceMap {
  std::vector<std::string> words;
  std::vector<std::string> pieces;
  std::vector<std::size_t> word_of_piece;

  // Index of the first piece of each word.
  std::vector<std::size_t> first_pieces() const;
  friend bool operator==(const WordPieceMap&, const WordPieceMap&) = default;
};

struct SegmenterConfig {
  std::size_t chunk = 4;
};

enum class AlignStrategy { Unified, Selective };

const char* strategy_name(AlignStrategy strategy) noexcept;
AlignStrategy parse_strategy(std::string_view name);

// std::nullopt is the IGNORE target.
using Target = std::optional<Tag>;

struct AlignedSequence {
  std::vector<std::string> pieces;
  std::vector<Target> targets;
  AlignStrategy strategy = AlignStrategy::Selective;
};

/// Fixed-width greedy chunker over UTF-8 code points. Words of at most
/// `chunk` code points stay whole; longer ones are cut left to right and
/// every piece after the first is prefixed with "##".
WordPieceMap segment_words(std::span<const std::string> words,
                           const SegmenterConfig& config = {});

/// Reads externally produced segmentations: per sentence, one
/// "piece<TAB>word_index" line per piece, sentences separated by blank
/// lines. `sentences` supplies the words each block refers to.
std::vector<WordPieceMap> import_piece_maps(std::string_view text,
                                            std::span<const TaggedSentence> sentences);

// Monotone, gap-free and surjective word indices.
void check_piece_map(const WordPieceMap& map);

// Concatenation of a word's pieces with continuation markers stripped.
std::string rejoin_word(const WordPieceMap& map, std::size_t word);

AlignedSequence align_unified(const TaggedSentence& sentence, const WordPieceMap& map,
                              bool bi_conversion = false);
AlignedSequence align_selective(const TaggedSentence& sentence, const WordPieceMap& map);
AlignedSequence align(const TaggedSentence& sentence, const WordPieceMap& map,
                      AlignStrategy strategy, bool bi_conversion = false);

/// Word tag = prediction at the word's first piece, then IOB2 repair.
std::vector<Tag> project_to_words(std::span<const Tag> piece_predictions,
                                  const WordPieceMap& map);

// "piece<TAB>word_index<TAB>target" lines, IGNORE for ignored targets.
std::string format_alignment(const AlignedSequence& aligned, const WordPieceMap& map);

}  // namespace somd
