#include "reqconflict/ner.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "embedded_lexicon.hpp"
#include "reqconflict/error.hpp"

namespace reqconflict {

TagSet::TagSet(std::vector<std::string> entity_types) : types_(std::move(entity_types)) {
  labels_.push_back("O");
  for (const auto& t : types_) {
    labels_.push_back("B-" + t);
    labels_.push_back("I-" + t);
  }
}

TagSet TagSet::software() { return TagSet({"Actor", "Action", "Object", "Property", "Metric", "Operator"}); }

TagSet TagSet::general() { return TagSet({"Noun", "Verb"}); }

std::optional<std::size_t> TagSet::index_of(std::string_view label) const {
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] == label) return i;
  }
  return std::nullopt;
}

std::optional<std::string> check_bio(const std::vector<std::string>& labels, const TagSet& tagset) {
  std::string prev = "O";
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto& l = labels[i];
    if (!tagset.contains(l)) return "unknown label '" + l + "' at token " + std::to_string(i + 1);
    if (l.rfind("I-", 0) == 0) {
      if (prev == "O" || prev.substr(2) != l.substr(2)) {
        return "label " + l + " at token " + std::to_string(i + 1) + " does not continue an entity of that type";
      }
    }
    prev = l;
  }
  return std::nullopt;
}

std::vector<AnnotatedSentence> parse_annotated_corpus(std::string_view text, const TagSet& tagset) {
  std::vector<AnnotatedSentence> corpus;
  AnnotatedSentence current;
  std::size_t sentence_line = 0;
  auto finish = [&] {
    if (current.tokens.empty()) return;
    if (auto err = check_bio(current.labels, tagset)) {
      throw validation_error("annotated corpus sentence at line " + std::to_string(sentence_line) + ": " + *err);
    }
    corpus.push_back(std::move(current));
    current = {};
  };
  std::size_t line_no = 0;
  for (auto& raw : split(text, '\n')) {
    ++line_no;
    std::string_view line = raw;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty()) {
      finish();
      continue;
    }
    auto tab = line.find('\t');
    if (tab == std::string_view::npos || line.find('\t', tab + 1) != std::string_view::npos) {
      throw validation_error("annotated corpus line " + std::to_string(line_no) + ": expected token<TAB>label");
    }
    auto token = trim(line.substr(0, tab));
    auto label = std::string(trim(line.substr(tab + 1)));
    if (token.empty()) throw validation_error("annotated corpus line " + std::to_string(line_no) + ": empty token");
    if (!tagset.contains(label)) {
      throw validation_error("annotated corpus line " + std::to_string(line_no) + ": unknown label '" + label + "'");
    }
    if (label.rfind("I-", 0) == 0) {
      const std::string prev = current.labels.empty() ? "O" : current.labels.back();
      if (prev == "O" || prev.substr(2) != label.substr(2)) {
        throw validation_error("annotated corpus line " + std::to_string(line_no) + ": " + label + " follows " + prev);
      }
    }
    if (current.tokens.empty()) sentence_line = line_no;
    current.tokens.push_back(Token{to_lower(token), std::string(token), current.tokens.size()});
    current.labels.push_back(label);
  }
  finish();
  return corpus;
}

std::vector<AnnotatedSentence> load_annotated_corpus(const std::string& path, const TagSet& tagset) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw runtime_error("cannot read annotated corpus '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_annotated_corpus(buf.str(), tagset);
}

std::string write_annotated_corpus(const std::vector<AnnotatedSentence>& corpus) {
  std::string out;
  for (std::size_t s = 0; s < corpus.size(); ++s) {
    if (s) out += '\n';
    for (std::size_t i = 0; i < corpus[s].tokens.size(); ++i) {
      out += corpus[s].tokens[i].original + '\t' + corpus[s].labels[i] + '\n';
    }
  }
  return out;
}

std::vector<EntitySpan> spans_from_tags(const std::vector<Token>& tokens, const std::vector<std::string>& labels) {
  if (tokens.size() != labels.size()) throw validation_error("spans_from_tags: token/label length mismatch");
  std::vector<EntitySpan> spans;
  auto close = [&](std::size_t end) {
    if (spans.empty() || spans.back().end != 0) return;
    auto& s = spans.back();
    s.end = end;
    for (std::size_t i = s.start; i < end; ++i) {
      if (i > s.start) s.surface += ' ';
      s.surface += tokens[i].original;
    }
  };
  std::string open_type;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto& l = labels[i];
    bool begin = l.rfind("B-", 0) == 0;
    bool inside = l.rfind("I-", 0) == 0;
    if (inside && !open_type.empty() && l.substr(2) == open_type) continue;
    if (!open_type.empty()) {
      close(i);
      open_type.clear();
    }
    if (begin || inside) {
      open_type = l.substr(2);
      spans.push_back({open_type, i, 0, {}});
    }
  }
  if (!open_type.empty()) close(labels.size());
  return spans;
}

std::vector<std::string> tags_from_spans(std::size_t length, const std::vector<EntitySpan>& spans) {
  std::vector<std::string> labels(length, "O");
  for (const auto& s : spans) {
    if (s.start >= s.end || s.end > length) throw validation_error("span out of range");
    labels[s.start] = "B-" + s.type;
    for (auto i = s.start + 1; i < s.end; ++i) labels[i] = "I-" + s.type;
  }
  return labels;
}

std::vector<std::string> extract_features(const std::vector<Token>& tokens, std::size_t i) {
  if (i >= tokens.size()) {
    throw validation_error("feature index " + std::to_string(i) + " out of range for " +
                           std::to_string(tokens.size()) + " tokens");
  }
  const auto& tok = tokens[i];
  const auto& w = tok.surface;
  const auto& orig = tok.original;
  std::vector<std::string> f;
  f.push_back("bias");
  f.push_back("word=" + w);
  f.push_back(i == 0 ? std::string("BOS") : "prev=" + tokens[i - 1].surface);
  f.push_back(i + 1 == tokens.size() ? std::string("EOS") : "next=" + tokens[i + 1].surface);
  if (i > 0 && i + 1 < tokens.size()) f.push_back("prev_next=" + tokens[i - 1].surface + "|" + tokens[i + 1].surface);

  if (is_all_digits(w)) f.push_back("is_digit");
  if (has_digit(w)) f.push_back("has_digit");
  bool alpha = !w.empty();
  std::size_t letters = 0, upper = 0;
  for (char c : orig) {
    bool lower_c = c >= 'a' && c <= 'z';
    bool upper_c = c >= 'A' && c <= 'Z';
    if (!lower_c && !upper_c) alpha = false;
    letters += (lower_c || upper_c) ? 1 : 0;
    upper += upper_c ? 1 : 0;
  }
  if (alpha) f.push_back("is_alpha");
  if (w.find('-') != std::string::npos) f.push_back("has_hyphen");
  if (!orig.empty() && orig[0] >= 'A' && orig[0] <= 'Z') f.push_back("init_cap");
  if (letters >= 2 && upper == letters) f.push_back("all_caps");

  for (std::size_t k = 1; k <= 3 && k <= w.size(); ++k) {
    f.push_back("pre" + std::to_string(k) + "=" + w.substr(0, k));
    f.push_back("suf" + std::to_string(k) + "=" + w.substr(w.size() - k));
  }
  return f;
}

// ---------------------------------------------------------------------------

Lexicon Lexicon::parse(std::string_view tsv) {
  Lexicon lex;
  std::size_t line_no = 0;
  for (auto& raw : split(tsv, '\n')) {
    ++line_no;
    auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    auto cols = split(line, '\t');
    if (cols.size() != 2) throw validation_error("lexicon line " + std::to_string(line_no) + ": expected word<TAB>tag");
    lex.entries_[to_lower(trim(cols[0]))] = std::string(trim(cols[1]));
  }
  return lex;
}

const Lexicon& Lexicon::builtin() {
  static const Lexicon lex = parse(embedded::kLexicon);
  return lex;
}

std::optional<std::string_view> Lexicon::lookup(std::string_view word) const {
  auto it = entries_.find(word);
  if (it == entries_.end()) return std::nullopt;
  return std::string_view(it->second);
}

namespace {

bool ends_with(std::string_view w, std::string_view suffix) {
  return w.size() > suffix.size() && w.substr(w.size() - suffix.size()) == suffix;
}

std::string suffix_tag(std::string_view w) {
  if (w.find('-') != std::string_view::npos && ends_with(w, "ed")) return "ADJ";
  if (w.size() > 4 && ends_with(w, "ly")) return "ADV";
  for (auto s : {"tion", "sion", "ment", "ity", "ness", "ance", "ence", "ship", "ism"}) {
    if (ends_with(w, s)) return "NOUN";
  }
  for (auto s : {"ize", "ise", "ify", "ate"}) {
    if (w.size() > 4 && ends_with(w, s)) return "VERB";
  }
  for (auto s : {"ous", "ive", "able", "ible", "ful", "ical"}) {
    if (ends_with(w, s)) return "ADJ";
  }
  if (w.size() > 4 && ends_with(w, "ed")) return "VERB";
  return "NOUN";
}

}  // namespace

std::vector<std::string> GeneralTagger::pos_tags(const std::vector<Token>& tokens) const {
  std::vector<std::string> tags(tokens.size());
  bool expect_verb = false;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto& w = tokens[i].surface;
    std::string tag;
    bool known = false;
    if (has_digit(w) && w.find_first_not_of("0123456789.,") == std::string::npos) {
      tag = "NUM";
      known = true;
    } else if (auto lex = lexicon_->lookup(w)) {
      tag = std::string(*lex);
      known = true;
    } else {
      tag = suffix_tag(w);
    }

    if (expect_verb) {
      bool able_to = w == "be" && i + 2 < tokens.size() && tokens[i + 1].surface == "able" &&
                     tokens[i + 2].surface == "to";
      if (able_to) {
        tags[i] = "AUX";
        tags[i + 1] = "ADJ";
        tags[i + 2] = "PART";
        i += 2;
        continue;
      }
      if (tag == "ADV" || tag == "NEG") {
        tags[i] = tag;
        continue;
      }
      if (tag == "NOUN" || tag == "VERB" || !known) tag = "VERB";
      expect_verb = false;
    }
    if (tag == "MODAL") expect_verb = true;
    tags[i] = tag;
  }
  return tags;
}

std::vector<EntitySpan> GeneralTagger::tag(std::string_view, const std::vector<Token>& tokens) const {
  auto tags = pos_tags(tokens);
  std::vector<EntitySpan> spans;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tags[i] == "NOUN") spans.push_back({"Noun", i, i + 1, tokens[i].original});
    else if (tags[i] == "VERB") spans.push_back({"Verb", i, i + 1, tokens[i].original});
  }
  return spans;
}

// ---------------------------------------------------------------------------

namespace {

std::string sentence_key(const std::vector<Token>& tokens) {
  std::string key;
  for (const auto& t : tokens) {
    if (!key.empty()) key += ' ';
    key += t.surface;
  }
  return key;
}

}  // namespace

ExternalTagger::ExternalTagger(const std::vector<AnnotatedSentence>& corpus) {
  for (const auto& s : corpus) by_sentence_[sentence_key(s.tokens)] = s.labels;
}

ExternalTagger ExternalTagger::load(const std::string& path) {
  return ExternalTagger(load_annotated_corpus(path, TagSet::general()));
}

std::vector<EntitySpan> ExternalTagger::tag(std::string_view id, const std::vector<Token>& tokens) const {
  auto it = by_sentence_.find(sentence_key(tokens));
  if (it == by_sentence_.end()) {
    throw runtime_error("external tags have no entry for requirement " + std::string(id));
  }
  return spans_from_tags(tokens, it->second);
}

}  // namespace reqconflict
