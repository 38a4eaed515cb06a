#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "factuality/core.hpp"

namespace factuality::oracle {

enum class Feature { Verb, Polarity, Frame, Environment };

std::string_view to_string(Feature f);

/// Ordered backoff tiers; tier 0 is the most specific feature combination.
class FeatureSchema {
 public:
  /// Throws Error for an empty list, an empty tier, a repeated tier, or a
  /// tier with more features than the one before it.
  explicit FeatureSchema(std::vector<std::vector<Feature>> tiers);

  /// MegaVeridicality and RP: (verb, polarity, frame), (verb, polarity), (verb), (polarity).
  static FeatureSchema embedded();
  /// CommitmentBank: (verb, environment), (verb), (environment).
  static FeatureSchema commitment_bank();
  /// Schema used for a dataset's expected inference.
  static FeatureSchema for_dataset(Dataset d);
  static FeatureSchema parse(std::string_view name);

  const std::vector<std::vector<Feature>>& tiers() const { return tiers_; }
  std::size_t size() const { return tiers_.size(); }

 private:
  std::vector<std::vector<Feature>> tiers_;
};

/// Feature value of an item, or nullopt if the item does not carry it.
std::optional<std::string> feature_value(const EventRecord& item, Feature f);

struct ExpectedInference {
  Score score;
  std::size_t tier = 0;
  std::size_t support = 0;
};

class FeatureIndex {
 public:
  struct Cell {
    double sum = 0.0;
    std::size_t count = 0;
    double mean() const { return sum / static_cast<double>(count); }
  };

  FeatureIndex(FeatureSchema schema, std::vector<std::unordered_map<std::string, Cell>> tiers);

  const FeatureSchema& schema() const { return schema_; }
  /// Cell for a tier and an already-joined key, if present.
  const Cell* find(std::size_t tier, const std::string& key) const;
  std::size_t tier_size(std::size_t tier) const { return tiers_.at(tier).size(); }

 private:
  FeatureSchema schema_;
  std::vector<std::unordered_map<std::string, Cell>> tiers_;
};

/// Joined key of an item for one tier; throws Error if a feature is missing.
std::string tier_key(const EventRecord& item, const std::vector<Feature>& tier);

/// Per tier, the mean gold label and count of training items per feature key.
FeatureIndex build_index(const std::vector<EventRecord>& train, const FeatureSchema& schema);

/// First matching tier in schema order; nullopt is the NoMatch outcome.
std::optional<ExpectedInference> expected_inference(const EventRecord& item,
                                                    const FeatureIndex& index);

/// Queries many items in parallel; result i belongs to items[i].
std::vector<std::optional<ExpectedInference>> expected_inference_all(
    const std::vector<EventRecord>& items, const FeatureIndex& index);

struct RulePredictions {
  std::map<std::string, Score> scores;
  std::vector<std::string> warnings;
};

/// Reads `id TAB score` rule-based predictions for the given items. Ids of
/// UDS-IH2 items are dropped with a warning; unknown or duplicate ids and
/// out-of-range scores are errors.
RulePredictions ingest_rule_predictions(const std::filesystem::path& path,
                                        const std::vector<EventRecord>& items);
RulePredictions parse_rule_predictions(std::string_view text, const std::string& source,
                                       const std::vector<EventRecord>& items);

nlohmann::json to_json(const std::string& id, const ExpectedInference& e);

/// Reads oracle JSON Lines (id, score, ...) into an id -> score map.
std::map<std::string, double> read_expected_jsonl(const std::filesystem::path& path);

}  // namespace factuality::oracle
