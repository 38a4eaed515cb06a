#include "factuality/signature.hpp"

#include <sstream>

#include "factuality/io.hpp"

namespace factuality::signature {

std::string to_string(const Signature& s) {
  return std::string(to_symbol(s.pos)) + "/" + std::string(to_symbol(s.neg));
}

EnvironmentPolicy parse_policy(std::string_view text) {
  const auto t = io::to_lower(text);
  if (t == "uniform") return EnvironmentPolicy::Uniform;
  if (t == "negation-only" || t == "negationonly" || t == "negation_only") {
    return EnvironmentPolicy::NegationOnly;
  }
  throw Error("unknown environment policy '" + std::string(text) + "'");
}

std::string_view to_string(EnvironmentPolicy p) {
  return p == EnvironmentPolicy::Uniform ? "uniform" : "negation-only";
}

void Lexicon::add(std::string verb, Frame frame, Signature sig) {
  verb = io::to_lower(verb);
  auto key = std::make_pair(verb, frame);
  if (entries_.count(key)) {
    throw Error("duplicate lexicon entry (" + verb + ", " + frame.name() + ")");
  }
  entries_.emplace(std::move(key), sig);
}

std::optional<Signature> Lexicon::find(const std::string& verb, const Frame& frame) const {
  auto it = entries_.find({verb, frame});
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::optional<Signature> Lexicon::lookup(std::string_view verb, const Frame& frame) const {
  const auto v = io::to_lower(verb);
  if (auto s = find(v, frame)) return s;
  const auto active = frame.active();
  if (active != frame) {
    if (auto s = find(v, active)) return s;
  }
  if (auto neutral = active.aspect_neutral()) {
    if (auto s = find(v, *neutral)) return s;
  }
  return std::nullopt;
}

Lexicon parse_lexicon(std::string_view text, const std::string& source) {
  Lexicon lex;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    const auto t = io::trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto ctx = source + ":" + std::to_string(n);
    const auto cols = io::split_any(t, "\t");
    if (cols.size() != 4) throw Error(ctx + ": expected verb, frame, X, Y");
    try {
      const auto x = io::trim(cols[2]);
      const auto y = io::trim(cols[3]);
      auto symbol = [&](const std::string& s) {
        if (s != "+" && s != "o" && s != "-") throw Error("unknown category symbol '" + s + "'");
        return parse_category(s);
      };
      lex.add(io::trim(cols[0]), Frame(io::trim(cols[1])), Signature{symbol(x), symbol(y)});
    } catch (const Error& e) {
      throw Error(ctx + ": " + e.what());
    }
  }
  return lex;
}

Lexicon load_lexicon(const std::filesystem::path& path) {
  return parse_lexicon(io::read_file(path), path.string());
}

Category project(const Signature& sig, Environment env, EnvironmentPolicy policy) {
  switch (env) {
    case Environment::None: return sig.pos;
    case Environment::Negation: return sig.neg;
    case Environment::Modal:
    case Environment::Question:
    case Environment::Conditional:
      return policy == EnvironmentPolicy::Uniform ? sig.neg : Category::Neutral;
  }
  return Category::Neutral;
}

Environment effective_environment(const EventRecord& item) {
  if (item.environment) return *item.environment;
  if (item.polarity) {
    return *item.polarity == Polarity::Positive ? Environment::None : Environment::Negation;
  }
  throw Error(item.id + ": neither environment nor polarity is set");
}

std::optional<Prediction> predict_item(const EventRecord& item, const Lexicon& lex,
                                       EnvironmentPolicy policy) {
  if (!item.verb) throw Error(item.id + ": signature prediction needs a verb");
  if (!item.frame && !item.environment) {
    throw Error(item.id + ": signature prediction needs a frame or an environment");
  }
  if (!item.frame) return std::nullopt;
  const auto sig = lex.lookup(*item.verb, *item.frame);
  if (!sig) return std::nullopt;
  const auto cat = project(*sig, effective_environment(item), policy);
  return Prediction{category_to_score(cat), cat};
}

std::vector<std::optional<Prediction>> predict_all(const std::vector<EventRecord>& items,
                                                   const Lexicon& lex, EnvironmentPolicy policy) {
  std::vector<std::optional<Prediction>> out(items.size());
  std::vector<std::string> errors(items.size());
  const auto n = static_cast<std::ptrdiff_t>(items.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      out[i] = predict_item(items[i], lex, policy);
    } catch (const Error& e) {
      errors[i] = e.what();
    }
  }
  for (const auto& e : errors) {
    if (!e.empty()) throw Error(e);
  }
  return out;
}

}  // namespace factuality::signature
