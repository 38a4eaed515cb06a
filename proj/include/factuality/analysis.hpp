#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "factuality/core.hpp"
#include "factuality/oracle.hpp"
#include "factuality/stats.hpp"

namespace factuality::analysis {

/// Scores from one external model run, keyed by record id.
struct PredictionSet {
  std::string model_name;
  std::map<std::string, Score> entries;
  std::string provenance;
};

/// `id TAB score` lines; model name defaults to the file stem.
PredictionSet read_predictions(const std::filesystem::path& path);
PredictionSet parse_predictions(std::string_view text, const std::string& source,
                                std::string model_name);
std::string to_tsv(const PredictionSet& preds);

/// Per-id mean over the sets that contain the id.
PredictionSet average(const std::vector<PredictionSet>& runs);

struct DatasetMetrics {
  Dataset dataset = Dataset::MV;
  std::size_t n = 0;
  double mae = 0.0;
  /// nullopt when Pearson r is undefined (constant predictions or golds).
  std::optional<double> pearson;
};

struct EvaluateOptions {
  /// Only items in this split are evaluated; nullopt evaluates every item.
  std::optional<Split> split = Split::Test;
};

/// MAE and Pearson r per dataset over the mean of the given runs. Throws
/// Error listing ids of evaluated items that have no prediction.
std::vector<DatasetMetrics> evaluate(const std::vector<EventRecord>& items,
                                     const std::vector<PredictionSet>& runs,
                                     const EvaluateOptions& options = {});

struct StudyRow {
  std::string id;
  Dataset dataset = Dataset::MV;
  /// |expected inference - gold|
  double expected_error = 0.0;
  /// |prediction - gold|
  double model_error = 0.0;
};

struct StudyResult {
  std::vector<StudyRow> rows;
  stats::MixedLinearModel model;
  bool all_slopes_positive = false;
  std::size_t excluded_udsih2 = 0;
};

/// Regresses model error on expected-inference error with per-dataset random
/// intercepts and slopes over ids shared by items, predictions and oracle.
StudyResult expected_inference_study(const std::vector<EventRecord>& items, const PredictionSet& preds,
                                     const std::map<std::string, double>& expected,
                                     const stats::MixedFitOptions& options = {});

struct RankedError {
  std::string id;
  Dataset dataset = Dataset::MV;
  double gold = 0.0;
  double prediction = 0.0;
  double abs_error = 0.0;
};

/// Items sorted by absolute error (descending, ties by id); the first
/// floor(frac * n) are returned, at least one.
std::vector<RankedError> rank_errors(const std::vector<EventRecord>& items, const PredictionSet& preds,
                                     double frac);

/// Number of items rank_errors keeps out of n.
std::size_t top_count(std::size_t n, double frac);

std::vector<RankedError> read_ranked(const std::filesystem::path& path);
std::string to_tsv(const std::vector<RankedError>& ranked);

enum class VarianceConvention { Sample, Population };

struct Dispersion {
  double mean_prediction_variance = 0.0;
  double mean_gold_variance = 0.0;
  std::size_t groups = 0;
  std::size_t items = 0;
};

/// Averages within-group variances of predictions and golds over groups of
/// at least two items sharing the given features.
Dispersion group_dispersion(const std::vector<EventRecord>& items, const PredictionSet& preds,
                            const std::vector<oracle::Feature>& keys,
                            VarianceConvention convention = VarianceConvention::Sample);

/// Verb-class word lists (one lemma per line).
struct VerbClasses {
  std::set<std::string> factive;
  std::set<std::string> neg_raising;
};

VerbClasses read_verb_classes(const std::filesystem::path& factive,
                              const std::filesystem::path& neg_raising);

struct ScatterRow {
  std::string id;
  double gold = 0.0;
  double prediction = 0.0;
  std::string facet;
  bool factive = false;
  bool neg_raising = false;
};

struct ScatterTable {
  std::string facet_name;
  std::vector<ScatterRow> rows;
};

ScatterTable scatter_export(const std::vector<EventRecord>& items, const PredictionSet& preds,
                            const std::vector<oracle::Feature>& facet, const VerbClasses& classes);

/// CSV with a leading '#' metadata line carrying the y = x reference diagonal.
std::string to_csv(const ScatterTable& table);

enum class ErrorCategory {
  PriorProbability,
  ContextSuggests,
  QUD,
  TenseAspect,
  SubjectAuthority,
  SubjectComplementInteraction,
  LexicalInference,
  AnnotationError,
};

inline constexpr std::size_t kErrorCategoryCount = 8;

std::string_view to_string(ErrorCategory c);
/// Accepts enum names and table labels, ignoring case and punctuation.
ErrorCategory parse_error_category(std::string_view text);

struct CategoryAnnotation {
  std::string id;
  ErrorCategory category = ErrorCategory::PriorProbability;
  std::string annotator;
};

/// `id TAB category TAB annotator` lines.
std::vector<CategoryAnnotation> read_category_annotations(const std::filesystem::path& path);
std::vector<CategoryAnnotation> parse_category_annotations(std::string_view text, const std::string& source);

struct CategoryCounts {
  Dataset dataset = Dataset::MV;
  std::size_t total = 0;
  std::array<std::size_t, kErrorCategoryCount> counts{};
  std::array<double, kErrorCategoryCount> percent{};
};

struct CategoryReport {
  std::vector<CategoryCounts> per_dataset;
  /// Ids labeled by two or more annotators, and how many of them agree.
  std::size_t shared = 0;
  std::size_t agreed = 0;
  std::optional<double> agreement_percent;
  std::vector<std::string> warnings;
};

/// Counts one category per ranked id (the first annotator's label) and raw
/// percent agreement over multiply-annotated ids.
CategoryReport error_category_report(const std::vector<RankedError>& ranked,
                                     const std::vector<CategoryAnnotation>& annotations);

nlohmann::json to_json(const std::vector<DatasetMetrics>& metrics);
nlohmann::json to_json(const Dispersion& d);
nlohmann::json to_json(const CategoryReport& r);
nlohmann::json to_json(const StudyResult& r);

/// Fixed-width text renderings for terminal reports.
std::string format_table(const std::vector<DatasetMetrics>& metrics);
std::string format_table(const CategoryReport& r);
std::string format_table(const StudyResult& r);

}  // namespace factuality::analysis
