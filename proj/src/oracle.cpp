#include "factuality/oracle.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "factuality/io.hpp"

namespace factuality::oracle {

using nlohmann::json;

std::string_view to_string(Feature f) {
  switch (f) {
    case Feature::Verb: return "verb";
    case Feature::Polarity: return "polarity";
    case Feature::Frame: return "frame";
    case Feature::Environment: return "environment";
  }
  return "?";
}

FeatureSchema::FeatureSchema(std::vector<std::vector<Feature>> tiers) : tiers_(std::move(tiers)) {
  if (tiers_.empty()) throw Error("feature schema needs at least one tier");
  for (std::size_t i = 0; i < tiers_.size(); ++i) {
    if (tiers_[i].empty()) throw Error("feature schema tier " + std::to_string(i) + " is empty");
    if (i > 0 && tiers_[i].size() > tiers_[i - 1].size()) {
      throw Error("feature schema tier " + std::to_string(i) + " is finer than the tier before it");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (tiers_[j] == tiers_[i]) throw Error("feature schema repeats a tier");
    }
  }
}

FeatureSchema FeatureSchema::embedded() {
  return FeatureSchema({{Feature::Verb, Feature::Polarity, Feature::Frame},
                        {Feature::Verb, Feature::Polarity},
                        {Feature::Verb},
                        {Feature::Polarity}});
}

FeatureSchema FeatureSchema::commitment_bank() {
  return FeatureSchema({{Feature::Verb, Feature::Environment}, {Feature::Verb}, {Feature::Environment}});
}

FeatureSchema FeatureSchema::for_dataset(Dataset d) {
  switch (d) {
    case Dataset::MV:
    case Dataset::RP: return embedded();
    case Dataset::CB: return commitment_bank();
    default:
      throw Error("no feature-match schema for " + std::string(factuality::to_string(d)) +
                  "; use rule-based predictions");
  }
}

FeatureSchema FeatureSchema::parse(std::string_view name) {
  const auto n = io::to_lower(name);
  if (n == "mv" || n == "rp" || n == "embedded") return embedded();
  if (n == "cb" || n == "commitment_bank") return commitment_bank();
  throw Error("unknown feature schema '" + std::string(name) + "'");
}

std::optional<std::string> feature_value(const EventRecord& item, Feature f) {
  switch (f) {
    case Feature::Verb: return item.verb;
    case Feature::Polarity:
      if (item.polarity) return std::string(factuality::to_string(*item.polarity));
      return std::nullopt;
    case Feature::Frame:
      if (item.frame) return item.frame->name();
      return std::nullopt;
    case Feature::Environment:
      if (item.environment) return std::string(factuality::to_string(*item.environment));
      return std::nullopt;
  }
  return std::nullopt;
}

std::string tier_key(const EventRecord& item, const std::vector<Feature>& tier) {
  std::string key;
  for (auto f : tier) {
    const auto v = feature_value(item, f);
    if (!v) throw Error(item.id + ": missing feature '" + std::string(to_string(f)) + "'");
    if (!key.empty()) key += '\x1f';
    key += *v;
  }
  return key;
}

FeatureIndex::FeatureIndex(FeatureSchema schema, std::vector<std::unordered_map<std::string, Cell>> tiers)
    : schema_(std::move(schema)), tiers_(std::move(tiers)) {}

const FeatureIndex::Cell* FeatureIndex::find(std::size_t tier, const std::string& key) const {
  const auto& m = tiers_.at(tier);
  auto it = m.find(key);
  return it == m.end() ? nullptr : &it->second;
}

namespace {

void require_features(const std::vector<EventRecord>& items, const FeatureSchema& schema) {
  std::set<Feature> needed;
  for (const auto& tier : schema.tiers()) needed.insert(tier.begin(), tier.end());
  std::vector<std::string> missing;
  for (const auto& item : items) {
    for (auto f : needed) {
      if (!feature_value(item, f)) {
        missing.push_back(item.id);
        break;
      }
    }
  }
  if (!missing.empty()) {
    std::string msg = "items missing schema features:";
    for (const auto& id : missing) msg += " " + id;
    throw Error(msg);
  }
}

}  // namespace

FeatureIndex build_index(const std::vector<EventRecord>& train, const FeatureSchema& schema) {
  if (train.empty()) throw Error("cannot build a feature index from an empty training list");
  require_features(train, schema);
  std::vector<std::unordered_map<std::string, FeatureIndex::Cell>> tiers(schema.size());
  for (const auto& item : train) {
    for (std::size_t t = 0; t < schema.size(); ++t) {
      auto& cell = tiers[t][tier_key(item, schema.tiers()[t])];
      cell.sum += item.gold.value();
      ++cell.count;
    }
  }
  return FeatureIndex(schema, std::move(tiers));
}

std::optional<ExpectedInference> expected_inference(const EventRecord& item, const FeatureIndex& index) {
  const auto& tiers = index.schema().tiers();
  std::vector<std::string> keys;
  keys.reserve(tiers.size());
  for (const auto& tier : tiers) keys.push_back(tier_key(item, tier));
  for (std::size_t t = 0; t < tiers.size(); ++t) {
    if (const auto* cell = index.find(t, keys[t])) {
      return ExpectedInference{Score(cell->mean()), t, cell->count};
    }
  }
  return std::nullopt;
}

std::vector<std::optional<ExpectedInference>> expected_inference_all(const std::vector<EventRecord>& items,
                                                                     const FeatureIndex& index) {
  require_features(items, index.schema());
  std::vector<std::optional<ExpectedInference>> out(items.size());
  const auto n = static_cast<std::ptrdiff_t>(items.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = expected_inference(items[i], index);
  return out;
}

RulePredictions parse_rule_predictions(std::string_view text, const std::string& source,
                                       const std::vector<EventRecord>& items) {
  std::unordered_map<std::string, Dataset> known;
  for (const auto& item : items) known.emplace(item.id, item.dataset);

  RulePredictions out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t n = 0;
  std::set<std::string> seen;
  while (std::getline(in, line)) {
    ++n;
    const auto t = io::trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto ctx = source + ":" + std::to_string(n);
    const auto cols = io::split_any(t, "\t");
    if (cols.size() != 2) throw Error(ctx + ": expected 'id<TAB>score'");
    const auto& id = cols[0];
    if (!seen.insert(id).second) throw Error(ctx + ": duplicate id " + id);
    auto it = known.find(id);
    if (it == known.end()) throw Error(ctx + ": unknown id " + id);
    const double v = io::parse_double(cols[1], ctx);
    if (!in_score_range(v)) throw Error(ctx + ": score outside [-3, 3]");
    if (it->second == Dataset::UDSIH2) {
      out.warnings.push_back(id + ": UDS-IH2 items are excluded from the expected-inference analysis");
      continue;
    }
    out.scores.emplace(id, Score(v));
  }
  return out;
}

RulePredictions ingest_rule_predictions(const std::filesystem::path& path,
                                        const std::vector<EventRecord>& items) {
  return parse_rule_predictions(io::read_file(path), path.string(), items);
}

json to_json(const std::string& id, const ExpectedInference& e) {
  return json{{"id", id}, {"score", e.score.value()}, {"tier", e.tier}, {"support", e.support}};
}

std::map<std::string, double> read_expected_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::map<std::string, double> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (io::trim(line).empty()) continue;
    const auto ctx = path.string() + ":" + std::to_string(n);
    try {
      const auto j = json::parse(line);
      const auto id = j.at("id").get<std::string>();
      const double score = j.at("score").get<double>();
      if (!in_score_range(score)) throw Error("score outside [-3, 3]");
      if (!out.emplace(id, score).second) throw Error("duplicate id " + id);
    } catch (const json::exception& e) {
      throw Error(ctx + ": " + e.what());
    } catch (const Error& e) {
      throw Error(ctx + ": " + e.what());
    }
  }
  return out;
}

}  // namespace factuality::oracle
