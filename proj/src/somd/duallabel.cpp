#include "somd/duallabel.hpp"

#include "somd/error.hpp"

namespace somd {

CompositeLabel split_label(std::string_view label, const LabelCatalog& catalog) {
  const auto sep = label.find('_');
  if (sep == std::string_view::npos || !catalog.composites().contains(label))
    throw Error(ErrorCode::UnknownLabel, "'" + std::string(label) + "' is not a catalog composite");
  return {std::string(label.substr(0, sep)), std::string(label.substr(sep + 1))};
}

const char* merge_policy_name(MergePolicy policy) noexcept {
  return policy == MergePolicy::Strict ? "strict" : "software-precedence";
}

MergePolicy parse_merge_policy(std::string_view name) {
  if (name == "strict") return MergePolicy::Strict;
  if (name == "software-precedence" || name == "software_precedence")
    return MergePolicy::SoftwarePrecedence;
  throw Error(ErrorCode::InvalidConfig, "unknown merge policy '" + std::string(name) + "'");
}

std::pair<Tag, Tag> decompose(const Tag& tag, const LabelCatalog& catalog) {
  if (tag.is_outside()) return {Tag::outside(), Tag::outside()};
  CompositeLabel parts = split_label(tag.label, catalog);
  return {Tag{tag.kind, std::move(parts.software)}, Tag{tag.kind, std::move(parts.mention)}};
}

namespace {

Tag make_composite(TagKind kind, const std::string& software, const std::string& mention,
                   const LabelCatalog& catalog) {
  std::string label = software + "_" + mention;
  if (!catalog.composites().contains(label))
    throw Error(ErrorCode::UnknownLabel, "'" + label + "' is not a catalog composite");
  return Tag{kind, std::move(label)};
}

}  // namespace

Tag compose(const Tag& software, const Tag& mention, MergePolicy policy,
            const LabelCatalog& catalog) {
  if (software.is_outside()) return Tag::outside();
  const bool agree = !mention.is_outside() && mention.kind == software.kind;
  if (agree) return make_composite(software.kind, software.label, mention.label, catalog);
  if (policy == MergePolicy::Strict) return Tag::outside();
  return make_composite(software.kind, software.label, catalog.default_mention_type(), catalog);
}

SplitDatasets split_dataset(const Dataset& dataset, const LabelCatalog& catalog) {
  SplitDatasets out;
  out.software.labels = catalog.software_types();
  out.mention.labels = catalog.mention_types();
  out.software.sentences.reserve(dataset.size());
  out.mention.sentences.reserve(dataset.size());
  for (const auto& sentence : dataset.sentences) {
    TaggedSentence sw{sentence.tokens, {}};
    TaggedSentence mt{sentence.tokens, {}};
    sw.tags.reserve(sentence.size());
    mt.tags.reserve(sentence.size());
    for (const Tag& t : sentence.tags) {
      auto [s, m] = decompose(t, catalog);
      sw.tags.push_back(std::move(s));
      mt.tags.push_back(std::move(m));
    }
    out.software.sentences.push_back(std::move(sw));
    out.mention.sentences.push_back(std::move(mt));
  }
  return out;
}

std::vector<Tag> merge_predictions(std::span<const Tag> software, std::span<const Tag> mention,
                                   MergePolicy policy, const LabelCatalog& catalog) {
  if (software.size() != mention.size())
    throw Error(ErrorCode::LengthMismatch, "software stream has " + std::to_string(software.size()) +
                                               " tags, mention stream " +
                                               std::to_string(mention.size()));
  std::vector<Tag> merged;
  merged.reserve(software.size());
  for (std::size_t i = 0; i < software.size(); ++i)
    merged.push_back(compose(software[i], mention[i], policy, catalog));
  return repair_iob2(merged);
}

Dataset merge_datasets(const Dataset& software, const Dataset& mention, MergePolicy policy,
                       const LabelCatalog& catalog) {
  if (software.size() != mention.size())
    throw Error(ErrorCode::SentenceCountMismatch,
                "software stream has " + std::to_string(software.size()) +
                    " sentences, mention stream " + std::to_string(mention.size()));
  Dataset out;
  out.labels = catalog.composites();
  out.sentences.reserve(software.size());
  for (std::size_t s = 0; s < software.size(); ++s) {
    const auto& sw = software.sentences[s];
    const auto& mt = mention.sentences[s];
    if (sw.tokens != mt.tokens)
      throw Error(ErrorCode::TokenMismatch, "sentence " + std::to_string(s) +
                                                ": software and mention streams differ in tokens");
    out.sentences.push_back({sw.tokens, merge_predictions(sw.tags, mt.tags, policy, catalog)});
  }
  return out;
}

}  // namespace somd
