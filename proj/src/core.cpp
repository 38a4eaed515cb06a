#include "factuality/core.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <numeric>
#include <utility>

namespace factuality {

namespace {

std::string lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

// Nine frames attested in MegaVeridicality plus the aspect-neutral infinitival
// frames used when a corpus does not mark eventive/stative complements.
const std::vector<std::string> kFrames = {
    "V_that_S",           "was_Ved_that_S",      "V_for_NP_to_VP",
    "V_NP_to_VP_ev",      "V_NP_to_VP_st",       "NP_was_Ved_to_VP_ev",
    "NP_was_Ved_to_VP_st", "V_to_VP_ev",         "V_to_VP_st",
    "V_to_VP",            "V_NP_to_VP",          "NP_was_Ved_to_VP",
};

const std::array<std::pair<std::string_view, std::string_view>, 4> kPassiveToActive = {{
    {"was_Ved_that_S", "V_that_S"},
    {"NP_was_Ved_to_VP_ev", "V_NP_to_VP_ev"},
    {"NP_was_Ved_to_VP_st", "V_NP_to_VP_st"},
    {"NP_was_Ved_to_VP", "V_NP_to_VP"},
}};

const std::array<std::pair<std::string_view, std::string_view>, 6> kAspectNeutral = {{
    {"V_to_VP_ev", "V_to_VP"},
    {"V_to_VP_st", "V_to_VP"},
    {"V_NP_to_VP_ev", "V_NP_to_VP"},
    {"V_NP_to_VP_st", "V_NP_to_VP"},
    {"NP_was_Ved_to_VP_ev", "NP_was_Ved_to_VP"},
    {"NP_was_Ved_to_VP_st", "NP_was_Ved_to_VP"},
}};

}  // namespace

bool in_score_range(double value) {
  return std::isfinite(value) && value >= kScoreMin && value <= kScoreMax;
}

Score::Score(double value) : value_(value) {
  if (!in_score_range(value)) {
    throw Error("factuality score out of [-3, 3]: " + std::to_string(value));
  }
}

std::string_view to_string(Category c) {
  switch (c) {
    case Category::Minus: return "Minus";
    case Category::Neutral: return "Neutral";
    case Category::Plus: return "Plus";
  }
  return "?";
}

std::string_view to_string(Polarity p) {
  return p == Polarity::Positive ? "Positive" : "Negative";
}

std::string_view to_string(Environment e) {
  switch (e) {
    case Environment::None: return "None";
    case Environment::Negation: return "Negation";
    case Environment::Modal: return "Modal";
    case Environment::Question: return "Question";
    case Environment::Conditional: return "Conditional";
  }
  return "?";
}

std::string_view to_string(Dataset d) {
  switch (d) {
    case Dataset::MV: return "MV";
    case Dataset::CB: return "CB";
    case Dataset::RP: return "RP";
    case Dataset::FactBank: return "FactBank";
    case Dataset::MEANTIME: return "MEANTIME";
    case Dataset::UW: return "UW";
    case Dataset::UDSIH2: return "UDSIH2";
  }
  return "?";
}

std::string_view to_string(Split s) {
  switch (s) {
    case Split::Train: return "Train";
    case Split::Dev: return "Dev";
    case Split::Test: return "Test";
    case Split::Unassigned: return "Unassigned";
  }
  return "?";
}

std::string_view to_symbol(Category c) {
  switch (c) {
    case Category::Minus: return "-";
    case Category::Neutral: return "o";
    case Category::Plus: return "+";
  }
  return "?";
}

Category parse_category(std::string_view text) {
  const auto t = lower(text);
  if (t == "+" || t == "plus") return Category::Plus;
  if (t == "o" || t == "neutral") return Category::Neutral;
  if (t == "-" || t == "minus") return Category::Minus;
  throw Error("unknown factuality category '" + std::string(text) + "'");
}

Polarity parse_polarity(std::string_view text) {
  const auto t = lower(text);
  if (t == "positive" || t == "pos") return Polarity::Positive;
  if (t == "negative" || t == "neg") return Polarity::Negative;
  throw Error("unknown polarity '" + std::string(text) + "'");
}

Environment parse_environment(std::string_view text) {
  const auto t = lower(text);
  if (t == "none") return Environment::None;
  if (t == "negation" || t == "neg") return Environment::Negation;
  if (t == "modal") return Environment::Modal;
  if (t == "question") return Environment::Question;
  if (t == "conditional" || t == "antecedent") return Environment::Conditional;
  throw Error("unknown environment '" + std::string(text) + "'");
}

Dataset parse_dataset(std::string_view text) {
  const auto t = lower(text);
  if (t == "mv" || t == "megaveridicality") return Dataset::MV;
  if (t == "cb" || t == "commitmentbank") return Dataset::CB;
  if (t == "rp") return Dataset::RP;
  if (t == "factbank" || t == "fb") return Dataset::FactBank;
  if (t == "meantime") return Dataset::MEANTIME;
  if (t == "uw") return Dataset::UW;
  if (t == "udsih2" || t == "uds-ih2" || t == "uds") return Dataset::UDSIH2;
  throw Error("unknown dataset '" + std::string(text) + "'");
}

Split parse_split(std::string_view text) {
  const auto t = lower(text);
  if (t == "train") return Split::Train;
  if (t == "dev" || t == "development" || t == "validation") return Split::Dev;
  if (t == "test") return Split::Test;
  if (t == "unassigned" || t.empty()) return Split::Unassigned;
  throw Error("unknown split '" + std::string(text) + "'");
}

std::string_view id_prefix(Dataset d) {
  switch (d) {
    case Dataset::MV: return "mv";
    case Dataset::CB: return "cb";
    case Dataset::RP: return "rp";
    case Dataset::FactBank: return "fb";
    case Dataset::MEANTIME: return "meantime";
    case Dataset::UW: return "uw";
    case Dataset::UDSIH2: return "uds";
  }
  return "?";
}

bool is_embedded_event_dataset(Dataset d) {
  return d == Dataset::MV || d == Dataset::CB || d == Dataset::RP;
}

Frame::Frame(std::string_view name) : name_(name) {
  if (!is_registered(name)) {
    throw Error("unknown frame '" + std::string(name) + "'");
  }
}

bool Frame::is_registered(std::string_view name) {
  return std::find(kFrames.begin(), kFrames.end(), name) != kFrames.end();
}

const std::vector<std::string>& Frame::vocabulary() { return kFrames; }

Frame Frame::active() const {
  for (const auto& [passive, active] : kPassiveToActive) {
    if (name_ == passive) return Frame(active);
  }
  return *this;
}

std::optional<Frame> Frame::aspect_neutral() const {
  for (const auto& [marked, neutral] : kAspectNeutral) {
    if (name_ == marked) return Frame(neutral);
  }
  return std::nullopt;
}

double mean(const std::vector<double>& values) {
  if (values.empty()) throw Error("mean of an empty list");
  return std::accumulate(values.begin(), values.end(), 0.0) /
         static_cast<double>(values.size());
}

void validate(const EventRecord& r) {
  auto fail = [&](const std::string& what) {
    throw Error("record " + r.id + ": " + what);
  };
  if (r.id.empty()) throw Error("record with empty id");
  if (!(r.event_span.start < r.event_span.end && r.event_span.end <= r.tokens.size())) {
    fail("event span [" + std::to_string(r.event_span.start) + ", " +
         std::to_string(r.event_span.end) + ") outside " + std::to_string(r.tokens.size()) +
         " tokens");
  }
  if (!in_score_range(r.gold.value())) fail("gold out of range");
  for (double a : r.annotations) {
    if (!in_score_range(a)) fail("annotation out of range: " + std::to_string(a));
  }
  if (!r.annotations.empty() && std::abs(r.gold.value() - mean(r.annotations)) > 1e-9) {
    fail("gold differs from the mean of its annotations");
  }
  if (is_embedded_event_dataset(r.dataset) && r.polarity && r.environment) {
    const bool positive = *r.polarity == Polarity::Positive;
    const bool no_env = *r.environment == Environment::None;
    if (positive != no_env) fail("environment None must coincide with positive polarity");
  }
}

std::string make_record_id(Dataset d, std::string_view source_key, std::size_t ordinal) {
  std::string id(id_prefix(d));
  id += ':';
  id += source_key;
  id += ':';
  id += std::to_string(ordinal);
  return id;
}

Score category_to_score(Category c) {
  switch (c) {
    case Category::Plus: return Score(3.0);
    case Category::Neutral: return Score(0.0);
    case Category::Minus: return Score(-3.0);
  }
  return Score(0.0);
}

Category score_to_category(Score s, double lo, double hi) {
  if (!(lo < hi)) throw Error("score_to_category: lower threshold must be below upper");
  if (s.value() < lo) return Category::Minus;
  if (s.value() > hi) return Category::Plus;
  return Category::Neutral;
}

}  // namespace factuality
