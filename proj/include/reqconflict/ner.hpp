#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "reqconflict/text.hpp"

namespace reqconflict {

/// BIO label inventory. Labels are ordered O, B-T1, I-T1, B-T2, I-T2, ...;
/// that order is also the tie-break order for decoding.
class TagSet {
 public:
  TagSet() = default;
  explicit TagSet(std::vector<std::string> entity_types);

  static TagSet software();  // Actor, Action, Object, Property, Metric, Operator
  static TagSet general();   // Noun, Verb

  const std::vector<std::string>& entity_types() const { return types_; }
  const std::vector<std::string>& labels() const { return labels_; }
  std::size_t size() const { return labels_.size(); }
  std::optional<std::size_t> index_of(std::string_view label) const;
  bool contains(std::string_view label) const { return index_of(label).has_value(); }

  friend bool operator==(const TagSet& a, const TagSet& b) { return a.types_ == b.types_; }

 private:
  std::vector<std::string> types_;
  std::vector<std::string> labels_;
};

struct AnnotatedSentence {
  std::vector<Token> tokens;
  std::vector<std::string> labels;
};

/// Empty when the sequence is valid BIO over `tagset`, else the reason.
std::optional<std::string> check_bio(const std::vector<std::string>& labels, const TagSet& tagset);

/// `token<TAB>label` per line, blank line between sentences. Errors carry
/// the offending line number.
std::vector<AnnotatedSentence> parse_annotated_corpus(std::string_view text, const TagSet& tagset);
std::vector<AnnotatedSentence> load_annotated_corpus(const std::string& path, const TagSet& tagset);
std::string write_annotated_corpus(const std::vector<AnnotatedSentence>& corpus);

struct EntitySpan {
  std::string type;
  std::size_t start = 0;  // token range [start, end)
  std::size_t end = 0;
  std::string surface;

  friend bool operator==(const EntitySpan&, const EntitySpan&) = default;
};

/// Maximal B-X (I-X)* runs. A stray I-X opens a new span of type X.
std::vector<EntitySpan> spans_from_tags(const std::vector<Token>& tokens, const std::vector<std::string>& labels);
std::vector<std::string> tags_from_spans(std::size_t length, const std::vector<EntitySpan>& spans);

/// Feature strings for token i: lexical, [-1, 1] context, character-level and
/// orthographic cues (the latter read from the original casing).
std::vector<std::string> extract_features(const std::vector<Token>& tokens, std::size_t i);

// ---------------------------------------------------------------------------
// Entity taggers feeding the overlap filter.

class EntityTagger {
 public:
  virtual ~EntityTagger() = default;
  virtual std::string name() const = 0;
  virtual std::vector<EntitySpan> tag(std::string_view id, const std::vector<Token>& tokens) const = 0;
};

/// Word -> coarse part of speech, most frequent tag per word.
class Lexicon {
 public:
  static Lexicon parse(std::string_view tsv);
  static const Lexicon& builtin();

  std::optional<std::string_view> lookup(std::string_view word) const;
  std::size_t size() const { return entries_.size(); }

 private:
  std::map<std::string, std::string, std::less<>> entries_;
};

/// Noun/verb extraction: lexicon lookup, then suffix rules, then "first
/// content word after a modal is a verb", default noun.
class GeneralTagger final : public EntityTagger {
 public:
  explicit GeneralTagger(const Lexicon& lexicon = Lexicon::builtin()) : lexicon_(&lexicon) {}
  explicit GeneralTagger(Lexicon&&) = delete;  // the lexicon must outlive the tagger
  std::string name() const override { return "general"; }
  std::vector<EntitySpan> tag(std::string_view id, const std::vector<Token>& tokens) const override;

  /// Coarse tag per token (NOUN, VERB, ADJ, ADV, DET, ...).
  std::vector<std::string> pos_tags(const std::vector<Token>& tokens) const;

 private:
  const Lexicon* lexicon_;
};

/// Pre-computed Noun/Verb BIO tags ingested from an annotated corpus file,
/// matched by the lowercased token sequence.
class ExternalTagger final : public EntityTagger {
 public:
  explicit ExternalTagger(const std::vector<AnnotatedSentence>& corpus);
  static ExternalTagger load(const std::string& path);

  std::string name() const override { return "external"; }
  std::vector<EntitySpan> tag(std::string_view id, const std::vector<Token>& tokens) const override;

 private:
  std::map<std::string, std::vector<std::string>> by_sentence_;
};

}  // namespace reqconflict
