#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "factuality/core.hpp"

namespace factuality::signature {

/// Implicative signature X/Y: the complement's factuality under positive
/// polarity (pos) and under negation (neg).
struct Signature {
  Category pos = Category::Neutral;
  Category neg = Category::Neutral;

  friend bool operator==(const Signature&, const Signature&) = default;
};

/// "+/-" style rendering.
std::string to_string(const Signature& s);

enum class EnvironmentPolicy {
  /// Every entailment-canceling environment behaves like negation.
  Uniform,
  /// Only negation uses the Y side; modal, question and conditional give o.
  NegationOnly,
};

EnvironmentPolicy parse_policy(std::string_view text);
std::string_view to_string(EnvironmentPolicy p);

class Lexicon {
 public:
  /// Throws Error if the key is already present.
  void add(std::string verb, Frame frame, Signature sig);

  /// Exact key first, then the active counterpart of a passive frame, then
  /// the aspect-neutral frame.
  std::optional<Signature> lookup(std::string_view verb, const Frame& frame) const;

  std::size_t size() const { return entries_.size(); }
  const std::map<std::pair<std::string, Frame>, Signature>& entries() const { return entries_; }

 private:
  std::optional<Signature> find(const std::string& verb, const Frame& frame) const;

  std::map<std::pair<std::string, Frame>, Signature> entries_;
};

/// TSV rows `verb TAB frame TAB X TAB Y`; '#' comments and blank lines skipped.
Lexicon load_lexicon(const std::filesystem::path& path);
Lexicon parse_lexicon(std::string_view text, const std::string& source);

Category project(const Signature& sig, Environment env, EnvironmentPolicy policy);

struct Prediction {
  Score score;
  Category category;
};

/// nullopt is the NoSignature outcome: no lexicon entry for (verb, frame).
/// Throws Error if the item lacks a verb, or lacks both frame and environment.
std::optional<Prediction> predict_item(const EventRecord& item, const Lexicon& lex,
                                       EnvironmentPolicy policy);

/// predict_item over many items, parallel across items.
std::vector<std::optional<Prediction>> predict_all(const std::vector<EventRecord>& items,
                                                   const Lexicon& lex, EnvironmentPolicy policy);

/// Environment an item is evaluated in: its own, else derived from polarity.
Environment effective_environment(const EventRecord& item);

}  // namespace factuality::signature
