#include "somd/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include <json.hpp>

#include "somd/error.hpp"

namespace somd {

namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

void check_parallel(const Dataset& gold, const Dataset& pred) {
  if (gold.size() != pred.size())
    throw Error(ErrorCode::SentenceCountMismatch, "gold has " + std::to_string(gold.size()) +
                                                      " sentences, prediction has " +
                                                      std::to_string(pred.size()));
  for (std::size_t s = 0; s < gold.size(); ++s) {
    if (gold.sentences[s].tokens != pred.sentences[s].tokens)
      throw Error(ErrorCode::TokenMismatch,
                  "sentence " + std::to_string(s) + ": gold and prediction tokens differ");
  }
}

std::vector<Confusion> sorted_confusions(const std::map<std::pair<std::string, std::string>, std::size_t>& tally) {
  std::vector<Confusion> out;
  for (const auto& [labels, n] : tally) out.push_back({labels.first, labels.second, n});
  std::stable_sort(out.begin(), out.end(),
                   [](const Confusion& a, const Confusion& b) { return a.count > b.count; });
  return out;
}

void tally_confusions(const std::vector<Span>& gold, const std::vector<Span>& pred,
                      std::map<std::pair<std::string, std::string>, std::size_t>& tally) {
  for (const Span& g : gold) {
    for (const Span& p : pred) {
      if (p.start == g.start && p.end == g.end && p.label != g.label) ++tally[{g.label, p.label}];
    }
  }
}

}  // namespace

double Counts::precision() const { return ratio(match, pred); }
double Counts::recall() const { return ratio(match, gold); }

double Counts::f1() const {
  const double p = precision();
  const double r = recall();
  return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

Counts& Counts::operator+=(const Counts& other) {
  gold += other.gold;
  pred += other.pred;
  match += other.match;
  return *this;
}

EvalReport exact_match_score(const Dataset& gold, const Dataset& pred) {
  check_parallel(gold, pred);
  EvalReport report;
  std::map<std::pair<std::string, std::string>, std::size_t> confusions;
  for (std::size_t s = 0; s < gold.size(); ++s) {
    const auto gold_spans = tags_to_spans(gold.sentences[s].tags);
    std::size_t repairs = 0;
    const auto pred_spans = tags_to_spans(repair_iob2(pred.sentences[s].tags, &repairs));
    report.repairs_applied += repairs;

    // Spans within a sentence are disjoint, so (start, end, label) identifies
    // at most one span on each side and set intersection is the one-to-one
    // matching.
    const std::set<Span> gold_set(gold_spans.begin(), gold_spans.end());
    for (const Span& g : gold_spans) ++report.per_class[g.label].gold;
    for (const Span& p : pred_spans) {
      auto& c = report.per_class[p.label];
      ++c.pred;
      if (gold_set.contains(p)) ++c.match;
    }
    tally_confusions(gold_spans, pred_spans, confusions);
  }
  for (const auto& [label, c] : report.per_class) report.micro += c;
  report.confusions = sorted_confusions(confusions);
  return report;
}

std::vector<Confusion> confusion_pairs(const Dataset& gold, const Dataset& pred) {
  check_parallel(gold, pred);
  std::map<std::pair<std::string, std::string>, std::size_t> tally;
  for (std::size_t s = 0; s < gold.size(); ++s) {
    tally_confusions(tags_to_spans(gold.sentences[s].tags),
                     tags_to_spans(repair_iob2(pred.sentences[s].tags)), tally);
  }
  return sorted_confusions(tally);
}

namespace {

nlohmann::json counts_json(const Counts& c) {
  return {{"precision", c.precision()}, {"recall", c.recall()}, {"f1", c.f1()},
          {"gold_count", c.gold},       {"pred_count", c.pred}, {"match_count", c.match}};
}

}  // namespace

std::string EvalReport::to_json(bool include_per_class) const {
  nlohmann::json j;
  j["micro"] = counts_json(micro);
  j["per_class"] = nlohmann::json::object();
  if (include_per_class)
    for (const auto& [label, c] : per_class) j["per_class"][label] = counts_json(c);
  auto conf = nlohmann::json::array();
  for (const auto& c : confusions)
    conf.push_back({{"gold_label", c.gold_label}, {"pred_label", c.pred_label}, {"count", c.count}});
  j["confusions"] = std::move(conf);
  j["repairs_applied"] = repairs_applied;
  j["scoring"] = "exact-match spans; predicted tags IOB2-repaired before span extraction";
  return j.dump(2) + "\n";
}

std::string EvalReport::to_table(bool include_per_class) const {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "%-36s %9s %9s %9s %6s %6s %6s\n", "label", "precision",
                "recall", "f1", "gold", "pred", "match");
  out += line;
  auto row = [&](const std::string& name, const Counts& c) {
    std::snprintf(line, sizeof line, "%-36s %9.4f %9.4f %9.4f %6zu %6zu %6zu\n", name.c_str(),
                  c.precision(), c.recall(), c.f1(), c.gold, c.pred, c.match);
    out += line;
  };
  if (include_per_class)
    for (const auto& [label, c] : per_class) row(label, c);
  row("micro", micro);
  if (!confusions.empty()) {
    out += "\nsame-boundary label confusions (gold -> predicted):\n";
    for (const auto& c : confusions) {
      std::snprintf(line, sizeof line, "  %s -> %s: %zu\n", c.gold_label.c_str(),
                    c.pred_label.c_str(), c.count);
      out += line;
    }
  }
  std::snprintf(line, sizeof line, "\nIOB2 repairs applied to predictions: %zu\n", repairs_applied);
  out += line;
  return out;
}

}  // namespace somd
