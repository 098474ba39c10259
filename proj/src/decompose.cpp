// Copyright 2026 The spatrwd Authors.
// SPDX-License-Identifier: Apache-2.0

#include "spatrwd/decompose.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <utility>

#include "spatrwd/error.hpp"
#include "spatrwd/unicode_text.hpp"

namespace spatrwd {
namespace {

struct Token {
  std::string text;
  bool quoted = false;
};

struct RelationPhrase {
  std::array<std::string_view, 4> words;
  RelationKind kind;
};

// Longest phrases first so "on the left of" wins over "on".
constexpr std::array<RelationPhrase, 20> kRelationPhrases = {{
    {{"to", "the", "left", "of"}, RelationKind::kLeftOf},
    {{"on", "the", "left", "of"}, RelationKind::kLeftOf},
    {{"to", "the", "right", "of"}, RelationKind::kRightOf},
    {{"on", "the", "right", "of"}, RelationKind::kRightOf},
    {{"in", "front", "of"}, RelationKind::kInFrontOf},
    {{"on", "top", "of"}, RelationKind::kOn},
    {{"left", "of"}, RelationKind::kLeftOf},
    {{"right", "of"}, RelationKind::kRightOf},
    {{"next", "to"}, RelationKind::kNextTo},
    {{"inside", "of"}, RelationKind::kInside},
    {{"inside"}, RelationKind::kInside},
    {{"in"}, RelationKind::kInside},
    {{"on"}, RelationKind::kOn},
    {{"beside"}, RelationKind::kNextTo},
    {{"above"}, RelationKind::kAbove},
    {{"over"}, RelationKind::kAbove},
    {{"below"}, RelationKind::kBelow},
    {{"under"}, RelationKind::kBelow},
    {{"beneath"}, RelationKind::kBelow},
    {{"behind"}, RelationKind::kBehind},
}};

constexpr std::array<std::string_view, 12> kNumberWords = {
    "one", "two", "three", "four", "five", "six",
    "seven", "eight", "nine", "ten", "eleven", "twelve"};

struct Direction {
  std::array<std::string_view, 3> words;
  double degrees;
};

// Azimuth seen from above, counterclockwise; 0 faces the camera and 90 faces
// the viewer's left.
constexpr std::array<Direction, 19> kDirections = {{
    {{"away", "from", "the"}, 180.0},  // "... camera" consumed separately
    {{"the", "camera"}, 0.0},
    {{"the", "viewer"}, 0.0},
    {{"front", "left"}, 45.0},
    {{"front", "right"}, 315.0},
    {{"back", "left"}, 135.0},
    {{"back", "right"}, 225.0},
    {{"front-left"}, 45.0},
    {{"front-right"}, 315.0},
    {{"back-left"}, 135.0},
    {{"back-right"}, 225.0},
    {{"forward"}, 0.0},
    {{"front"}, 0.0},
    {{"left"}, 90.0},
    {{"away"}, 180.0},
    {{"back"}, 180.0},
    {{"backward"}, 180.0},
    {{"backwards"}, 180.0},
    {{"right"}, 270.0},
}};

// Category names longer than this are almost always a misparsed clause.
constexpr std::size_t kMaxNounWords = 3;

[[noreturn]] void Unrecognized(std::string_view why) {
  throw Error(ErrorKind::kUnrecognizedTemplate, std::string(why));
}

std::vector<Token> Tokenize(std::string_view prompt) {
  std::string s = text::CollapseWhitespace(text::Nfc(prompt));
  while (!s.empty() && (s.back() == '.' || s.back() == '!')) s.pop_back();
  std::vector<Token> tokens;
  std::string word;
  auto flush = [&] {
    if (!word.empty()) tokens.push_back({text::Lower(word), false});
    word.clear();
  };
  static constexpr std::string_view kOpenCurly = "\xE2\x80\x9C";
  static constexpr std::string_view kCloseCurly = "\xE2\x80\x9D";
  std::size_t i = 0;
  while (i < s.size()) {
    const std::string_view rest = std::string_view(s).substr(i);
    const bool straight = rest.front() == '"';
    const bool curly = rest.starts_with(kOpenCurly);
    if (straight || curly) {
      flush();
      const std::size_t start = i + (straight ? 1 : kOpenCurly.size());
      std::size_t end = straight ? s.find('"', start) : s.find(kCloseCurly, start);
      if (end == std::string::npos) Unrecognized("unterminated quoted text");
      tokens.push_back({s.substr(start, end - start), true});
      i = end + (straight ? 1 : kCloseCurly.size());
      continue;
    }
    const char c = rest.front();
    if (c == ' ') {
      flush();
    } else if (c == ',' || c == ';') {
      flush();
      tokens.push_back({",", false});
    } else {
      word.push_back(c);
    }
    ++i;
  }
  flush();
  return tokens;
}

std::optional<int> NumberValue(std::string_view word) {
  for (std::size_t i = 0; i < kNumberWords.size(); ++i) {
    if (kNumberWords[i] == word) return static_cast<int>(i + 1);
  }
  int value = 0;
  auto [ptr, ec] = std::from_chars(word.data(), word.data() + word.size(), value);
  if (ec == std::errc() && ptr == word.data() + word.size() && value >= 1 && value <= 1000) {
    return value;
  }
  return std::nullopt;
}

enum class Determiner { kNone, kIndefinite, kDefinite, kNumber, kNo };

struct NounPhrase {
  Determiner det = Determiner::kNone;
  int number = 0;
  std::optional<std::string> color;
  std::string noun;
  std::optional<std::string> text;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  ConstraintSet Parse(std::string_view prompt) {
    set_.prompt = std::string(prompt);
    SkipPrefix();
    ParseBody();
    ParseExclusions();
    if (!AtEnd()) Unrecognized("unexpected \"" + tokens_[pos_].text + "\"");
    if (set_.inclusions.empty()) Unrecognized("no entities found");
    set_.tag = DeriveTag();
    Validate(set_);
    return std::move(set_);
  }

 private:
  bool AtEnd() const { return pos_ >= tokens_.size(); }

  template <std::size_t N>
  std::size_t MatchLength(const std::array<std::string_view, N>& words, std::size_t at) const {
    std::size_t n = 0;
    for (std::string_view w : words) {
      if (w.empty()) break;
      if (at + n >= tokens_.size() || tokens_[at + n].quoted || tokens_[at + n].text != w) return 0;
      ++n;
    }
    return n;
  }

  bool PeekWords(std::initializer_list<std::string_view> words, std::size_t at) const {
    std::size_t n = 0;
    for (std::string_view w : words) {
      if (at + n >= tokens_.size() || tokens_[at + n].quoted || tokens_[at + n].text != w) {
        return false;
      }
      ++n;
    }
    return true;
  }
  bool Peek(std::initializer_list<std::string_view> words) const { return PeekWords(words, pos_); }
  bool Accept(std::initializer_list<std::string_view> words) {
    if (!Peek(words)) return false;
    pos_ += words.size();
    return true;
  }

  std::optional<RelationKind> PeekRelation(std::size_t at, std::size_t* length) const {
    for (const auto& phrase : kRelationPhrases) {
      if (std::size_t n = MatchLength(phrase.words, at); n > 0) {
        if (length) *length = n;
        return phrase.kind;
      }
    }
    return std::nullopt;
  }

  bool IsTextIntro(std::size_t at) const {
    return PeekWords({"with", "the", "text"}, at) || PeekWords({"with", "the", "word"}, at) ||
           PeekWords({"labeled"}, at) || PeekWords({"labelled"}, at) ||
           PeekWords({"that", "says"}, at) || PeekWords({"reading"}, at);
  }

  bool IsNounStop(std::size_t at) const {
    if (at >= tokens_.size() || tokens_[at].quoted) return true;
    const std::string& t = tokens_[at].text;
    if (t == "and" || t == "," || t == "or" || t == "facing" || t == "each" || t == "is" ||
        t == "are" || t == "without" || t == "but") {
      return true;
    }
    if (PeekWords({"with", "no"}, at) || PeekWords({"from", "nearest"}, at) ||
        PeekWords({"from", "farthest"}, at) || PeekWords({"from", "closest"}, at)) {
      return true;
    }
    return IsTextIntro(at) || PeekRelation(at, nullptr).has_value();
  }

  void SkipPrefix() {
    for (auto prefix : {std::initializer_list<std::string_view>{"a", "photo", "of"},
                        {"a", "photograph", "of"},
                        {"a", "picture", "of"},
                        {"an", "image", "of"},
                        {"an", "illustration", "of"}}) {
      if (Accept(prefix)) return;
    }
  }

  std::optional<std::string> ParseText() {
    for (auto intro : {std::initializer_list<std::string_view>{"with", "the", "text"},
                       {"with", "the", "word"},
                       {"labeled"},
                       {"labelled"},
                       {"that", "says"},
                       {"reading"}}) {
      if (Accept(intro)) {
        if (AtEnd() || !tokens_[pos_].quoted) Unrecognized("expected quoted text");
        std::string value = tokens_[pos_++].text;
        if (value.empty()) Unrecognized("empty quoted text");
        return value;
      }
    }
    return std::nullopt;
  }

  NounPhrase ParseNounPhrase(bool allow_bare) {
    if (AtEnd()) Unrecognized("expected a noun phrase");
    NounPhrase np;
    const std::string& first = tokens_[pos_].text;
    if (tokens_[pos_].quoted) Unrecognized("expected a noun phrase");
    if (first == "a" || first == "an") {
      np.det = Determiner::kIndefinite;
      ++pos_;
    } else if (first == "the") {
      np.det = Determiner::kDefinite;
      ++pos_;
    } else if (first == "no") {
      np.det = Determiner::kNo;
      ++pos_;
    } else if (auto n = NumberValue(first)) {
      np.det = Determiner::kNumber;
      np.number = *n;
      ++pos_;
    } else if (!allow_bare) {
      Unrecognized("expected a determiner before \"" + first + "\"");
    }
    if (!AtEnd() && !IsNounStop(pos_ + 1)) {
      if (auto color = NormalizeColor(tokens_[pos_].text); color && !tokens_[pos_].quoted) {
        np.color = *color;
        ++pos_;
      }
    }
    std::vector<std::string> words;
    while (!IsNounStop(pos_)) words.push_back(tokens_[pos_++].text);
    if (words.empty()) Unrecognized("missing noun");
    if (words.size() > kMaxNounWords) Unrecognized("noun phrase \"" + words.front() + " ...\" is too long");
    const bool plural = (np.det == Determiner::kNumber && np.number > 1) ||
                        np.det == Determiner::kNone || np.det == Determiner::kNo;
    if (plural) words.back() = Singularize(words.back());
    for (std::size_t i = 0; i < words.size(); ++i) {
      if (i) np.noun += ' ';
      np.noun += words[i];
    }
    np.text = ParseText();
    return np;
  }

  // Resolves "the <noun>" to an earlier mention; otherwise creates an entity.
  AtomicConstraint& Resolve(const NounPhrase& np, std::vector<AtomicConstraint>& list) {
    if (np.det == Determiner::kDefinite && !np.color && !np.text) {
      for (auto* l : {&set_.inclusions, &set_.exclusions}) {
        for (auto& c : *l) {
          if (c.category == np.noun) return c;
        }
      }
    }
    AtomicConstraint c;
    c.id = "e" + std::to_string(++next_id_);
    c.category = np.noun;
    if (np.det == Determiner::kNumber) c.count = np.number;
    c.color = np.color;
    c.text = np.text;
    list.push_back(std::move(c));
    return list.back();
  }

  bool AcceptSeparator() {
    if (Peek({"and", "no"}) || Peek({",", "no"}) || Peek({",", "but"})) return false;
    if (Accept({",", "and"})) return true;
    if (Accept({"and"})) return true;
    if (Accept({","})) return true;
    return false;
  }

  OrientationTarget ParseDirection() {
    if (!AtEnd()) {
      if (auto n = ParseDegrees()) return {*n, OrientationMode::kContinuous};
    }
    for (const auto& d : kDirections) {
      if (std::size_t n = MatchLength(d.words, pos_); n > 0) {
        pos_ += n;
        if (d.words[0] == "away" && n == 3) {
          if (!Accept({"camera"}) && !Accept({"viewer"})) Unrecognized("expected \"camera\"");
        }
        return {d.degrees, OrientationMode::kCategorical8};
      }
    }
    Unrecognized("unknown facing direction");
  }

  std::optional<double> ParseDegrees() {
    if (pos_ + 1 >= tokens_.size() || tokens_[pos_ + 1].text != "degrees") return std::nullopt;
    const std::string& num = tokens_[pos_].text;
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), value);
    if (ec != std::errc() || ptr != num.data() + num.size()) return std::nullopt;
    if (!std::isfinite(value) || value < 0.0 || value >= 360.0) {
      Unrecognized("orientation must lie in [0, 360) degrees");
    }
    pos_ += 2;
    return value;
  }

  void ParseBody() {
    std::vector<std::string> top_level;  // subjects in mention order
    while (true) {
      NounPhrase np = ParseNounPhrase(false);
      if (Accept({"each"})) {
        if (np.det != Determiner::kNumber || np.number < 2 || np.color) {
          Unrecognized("\"each\" needs a count of at least two");
        }
        auto text_value = ParseText();
        if (!text_value) Unrecognized("expected text after \"each\"");
        for (int i = 0; i < np.number; ++i) {
          AtomicConstraint c;
          c.id = "e" + std::to_string(++next_id_);
          c.category = np.noun;
          if (i == 0) c.count = np.number;
          c.text = *text_value;
          set_.inclusions.push_back(std::move(c));
        }
        text_count_ = true;
        return;
      }
      AtomicConstraint& subject = Resolve(np, set_.inclusions);
      const std::string subject_id = subject.id;
      top_level.push_back(subject_id);
      Accept({"is"}) || Accept({"are"});
      if (Accept({"facing"})) {
        const OrientationTarget target = ParseDirection();
        MutableFind(subject_id).orientation = target;
      } else if (std::size_t n = 0; auto kind = PeekRelation(pos_, &n)) {
        pos_ += n;
        NounPhrase object_np = ParseNounPhrase(false);
        AtomicConstraint& object = Resolve(object_np, set_.inclusions);
        const std::string object_id = object.id;
        if (object_id == subject_id) Unrecognized("entity related to itself");
        AtomicConstraint& subj = MutableFind(subject_id);
        if (subj.relation) Unrecognized("entity \"" + subj.category + "\" already has a relation");
        subj.relation = MakeRelation(ToString(*kind), subject_id, object_id);
        ++relation_count_;
        if (IsDepthRelation(*kind)) depth_relation_ = true;
      }
      if (!AcceptSeparator()) break;
    }
    const bool near_first = Accept({"from", "nearest", "to", "farthest"}) ||
                            Accept({"from", "closest", "to", "farthest"});
    const bool far_first = !near_first && (Accept({"from", "farthest", "to", "nearest"}) ||
                                           Accept({"from", "farthest", "to", "closest"}));
    if (near_first || far_first) {
      if (top_level.size() < 2 || relation_count_ > 0) {
        Unrecognized("depth ordering needs two or more unrelated entities");
      }
      const int k = static_cast<int>(top_level.size());
      for (int i = 0; i < k; ++i) {
        MutableFind(top_level[static_cast<std::size_t>(i)]).depth_rank = near_first ? i + 1 : k - i;
      }
      depth_order_ = true;
    }
  }

  void ParseExclusions() {
    if (AtEnd()) return;
    if (Accept({"without"})) {
      do {
        NounPhrase np = ParseNounPhrase(true);
        if (np.det == Determiner::kDefinite) np.det = Determiner::kIndefinite;
        AtomicConstraint& excl = Resolve(np, set_.exclusions);
        const std::string id = excl.id;
        if (std::size_t n = 0; auto kind = PeekRelation(pos_, &n)) {
          pos_ += n;
          NounPhrase object_np = ParseNounPhrase(false);
          // A fresh object here would itself be penalized, so it must name an earlier entity.
          const std::size_t before = set_.inclusions.size() + set_.exclusions.size();
          AtomicConstraint& object = Resolve(object_np, set_.exclusions);
          if (set_.inclusions.size() + set_.exclusions.size() != before) {
            Unrecognized("relation inside an exclusion must refer to an earlier entity with \"the\"");
          }
          const std::string object_id = object.id;
          if (object_id == id) Unrecognized("entity related to itself");
          MutableFind(id).relation = MakeRelation(ToString(*kind), id, object_id);
        }
      } while (Accept({"and"}) || Accept({"or"}) || Accept({","}));
      return;
    }
    bool first = true;
    while (Accept({"with", "no"}) || Accept({"but", "no"}) || Accept({",", "but", "no"}) ||
           Accept({",", "no"}) || Accept({"and", "no"}) || (!first && Accept({"or"}))) {
      first = false;
      NounPhrase np = ParseNounPhrase(true);
      if (np.det == Determiner::kDefinite) Unrecognized("exclusion cannot reference \"the\"");
      Resolve(np, set_.exclusions);
    }
  }

  AtomicConstraint& MutableFind(const std::string& id) {
    for (auto* l : {&set_.inclusions, &set_.exclusions}) {
      for (auto& c : *l) {
        if (c.id == id) return c;
      }
    }
    Unrecognized("internal: missing entity " + id);
  }

  Tag DeriveTag() const {
    bool any_text = false, any_orientation = false, any_count = false, any_color = false;
    for (const auto& c : set_.inclusions) {
      any_text |= c.text.has_value();
      any_orientation |= c.orientation.has_value();
      any_count |= c.count.has_value();
      any_color |= c.color.has_value();
    }
    if (text_count_) return Tag::kTextCount;
    if (depth_order_) return Tag::kDepth3d;
    if (any_text) return Tag::kTextPosition;
    if (any_orientation) return Tag::kOrientation;
    if (relation_count_ >= 2) return Tag::kComplex;
    if (relation_count_ == 1) return depth_relation_ ? Tag::kDepth3d : Tag::kPosition;
    if (any_count) return Tag::kCounting;
    if (any_color) return Tag::kColor;
    return set_.inclusions.size() == 1 ? Tag::kSingleObject : Tag::kTwoObject;
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  ConstraintSet set_;
  int next_id_ = 0;
  int relation_count_ = 0;
  bool depth_relation_ = false;
  bool depth_order_ = false;
  bool text_count_ = false;
};

bool EndsWith(std::string_view s, std::string_view suffix) { return s.ends_with(suffix); }

}  // namespace

std::string Singularize(std::string_view noun) {
  static constexpr std::array<std::pair<std::string_view, std::string_view>, 22> kIrregular = {{
      {"people", "person"}, {"men", "man"},         {"women", "woman"},
      {"children", "child"}, {"mice", "mouse"},      {"geese", "goose"},
      {"teeth", "tooth"},    {"feet", "foot"},       {"knives", "knife"},
      {"wolves", "wolf"},    {"leaves", "leaf"},     {"shelves", "shelf"},
      {"loaves", "loaf"},    {"sheep", "sheep"},     {"fish", "fish"},
      {"deer", "deer"},      {"shoes", "shoe"},      {"toes", "toe"},
      {"buses", "bus"},      {"glasses", "glass"},   {"scissors", "scissors"},
      {"skis", "ski"},
  }};
  for (const auto& [plural, singular] : kIrregular) {
    if (noun == plural) return std::string(singular);
  }
  std::string s(noun);
  if (s.size() > 4 && EndsWith(s, "ies")) return s.substr(0, s.size() - 3) + "y";
  for (std::string_view suffix : {"ches", "shes", "sses", "xes", "zzes", "oes"}) {
    if (s.size() > suffix.size() && EndsWith(s, suffix)) return s.substr(0, s.size() - 2);
  }
  if (s.size() > 2 && s.back() == 's' && !EndsWith(s, "ss") && !EndsWith(s, "us") &&
      !EndsWith(s, "is")) {
    return s.substr(0, s.size() - 1);
  }
  return s;
}

ConstraintSet DecomposeTemplate(std::string_view prompt) {
  Parser parser(Tokenize(prompt));
  return parser.Parse(prompt);
}

}  // namespace spatrwd
