#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace factuality {

/// Raised for malformed input, violated preconditions and invalid values.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kScoreMin = -3.0;
inline constexpr double kScoreMax = 3.0;

/// A factuality rating on the unified [-3, +3] scale.
class Score {
 public:
  constexpr Score() = default;
  explicit Score(double value);

  constexpr double value() const { return value_; }

  friend constexpr bool operator==(Score, Score) = default;
  friend constexpr auto operator<=>(Score, Score) = default;

 private:
  double value_ = 0.0;
};

bool in_score_range(double value);

enum class Category { Minus, Neutral, Plus };
enum class Polarity { Positive, Negative };
enum class Environment { None, Negation, Modal, Question, Conditional };
enum class Dataset { MV, CB, RP, FactBank, MEANTIME, UW, UDSIH2 };
enum class Split { Train, Dev, Test, Unassigned };

std::string_view to_string(Category c);
std::string_view to_string(Polarity p);
std::string_view to_string(Environment e);
std::string_view to_string(Dataset d);
std::string_view to_string(Split s);

/// Signature symbol: "+", "o" or "-".
std::string_view to_symbol(Category c);

Category parse_category(std::string_view text);
Polarity parse_polarity(std::string_view text);
Environment parse_environment(std::string_view text);
Dataset parse_dataset(std::string_view text);
Split parse_split(std::string_view text);

/// Lowercase prefix used in record ids, e.g. "cb" or "fb".
std::string_view id_prefix(Dataset d);

/// Datasets whose events are complements of a clause-embedding verb.
bool is_embedded_event_dataset(Dataset d);

/// Syntactic frame of the embedding verb, drawn from a closed vocabulary.
class Frame {
 public:
  /// Throws Error for names outside the registered vocabulary.
  explicit Frame(std::string_view name);

  const std::string& name() const { return name_; }

  /// Active counterpart of a passive frame; the frame itself otherwise.
  Frame active() const;
  /// Aspect-neutral form of an eventive/stative frame, if one exists.
  std::optional<Frame> aspect_neutral() const;

  static bool is_registered(std::string_view name);
  static const std::vector<std::string>& vocabulary();

  friend bool operator==(const Frame&, const Frame&) = default;
  friend auto operator<=>(const Frame&, const Frame&) = default;

 private:
  std::string name_;
};

/// Half-open token range [start, end).
struct Span {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - start; }
  friend bool operator==(const Span&, const Span&) = default;
};

struct EventRecord {
  std::string id;
  Dataset dataset = Dataset::MV;
  Split split = Split::Unassigned;
  std::string sentence;
  std::vector<std::string> tokens;
  Span event_span;
  Score gold;
  std::vector<double> annotations;
  std::optional<std::string> verb;
  std::optional<Frame> frame;
  std::optional<Polarity> polarity;
  std::optional<Environment> environment;
  std::optional<std::string> genre;
  /// Which span rule produced event_span ("root", "clause:neg", ...).
  std::optional<std::string> span_rule;

  friend bool operator==(const EventRecord&, const EventRecord&) = default;
};

/// Throws Error naming the record when a structural invariant does not hold.
void validate(const EventRecord& record);

std::string make_record_id(Dataset d, std::string_view source_key, std::size_t ordinal);

Score category_to_score(Category c);

/// Bins a mean score: below lo is Minus, above hi is Plus, [lo, hi] is Neutral.
Category score_to_category(Score s, double lo = -0.5, double hi = 0.5);

double mean(const std::vector<double>& values);

}  // namespace factuality
