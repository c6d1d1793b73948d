#pragma once

// Exact-match span scoring: a predicted span is correct only when a gold
// span in the same sentence has the same start, end and label.

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "somd/corpus.hpp"

namespace somd {

struct Counts {
  std::size_t gold = 0;
  std::size_t pred = 0;
  std::size_t match = 0;

  double precision() const;
  double recall() const;
  double f1() const;

  Counts& operator+=(const Counts& other);
  friend bool operator==(const Counts&, const Counts&) = default;
};

struct Confusion {
  std::string gold_label;
  std::string pred_label;
  std::size_t count = 0;

  friend bool operator==(const Confusion&, const Confusion&) = default;
};

struct EvalReport {
  Counts micro;
  std::map<std::string, Counts> per_class;
  std::vector<Confusion> confusions;  // by count desc, then labels
  std::size_t repairs_applied = 0;    // predicted tags rewritten by IOB2 repair

  std::string to_json(bool include_per_class = true) const;
  std::string to_table(bool include_per_class = true) const;
};

/// Scores `pred` against `gold`. Predicted tags are IOB2-repaired first;
/// gold must already be valid.
EvalReport exact_match_score(const Dataset& gold, const Dataset& pred);

/// Span pairs with identical boundaries but different labels, aggregated
/// over the corpus.
std::vector<Confusion> confusion_pairs(const Dataset& gold, const Dataset& pred);

}  // namespace somd
