#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "factuality/conllu.hpp"
#include "factuality/core.hpp"

namespace factuality::harmonizer {

/// Outcome of one exclusion rule. kept + removed equals the rule's input size.
struct FilterReport {
  std::size_t kept = 0;
  std::size_t removed = 0;
  std::vector<std::string> removed_ids;
  std::string rule;
  std::vector<std::string> warnings;
};

nlohmann::json to_json(const FilterReport& report);

struct LoadResult {
  std::vector<EventRecord> records;
  /// One report per exclusion rule, in the order the rules were applied.
  std::vector<FilterReport> filters;
};

/// Long-format MegaVeridicality table, one row per annotator response.
/// Required columns: verb, frame, polarity, sentence and a response column
/// (`veridicality` or `response`) holding yes/maybe/no. Optional: voice, split.
std::vector<EventRecord> load_megaveridicality(const std::filesystem::path& path);

/// Maps a MegaVeridicality frame (plus voice) onto the frame vocabulary.
Frame megaveridicality_frame(const std::string& frame, const std::string& voice);

struct RpOptions {
  /// Record ids whose annotated event is not expressible as a single span.
  std::set<std::string> multi_span_ids;
};

/// Reads a plain-text id list: one id per line, '#' comments and blanks ignored.
std::set<std::string> read_id_list(const std::filesystem::path& path);

/// RP table. Required columns: sentence, verb, frame, polarity and either an
/// `annotations` column ("2,2,1") or annotation_1..annotation_k columns with
/// integers in [-2, 2]. Optional: complement, split, genre.
LoadResult load_rp(const std::filesystem::path& path, const RpOptions& options = {});

/// CommitmentBank. Long format (uID, Answer, Verb, Embedding, Target, optional
/// Prompt/genre/split; one row per response) or wide format (id, sentence,
/// verb, environment, annotations).
LoadResult load_cb(const std::filesystem::path& path);

/// Token-per-line unified files (index TAB token TAB score-or-_) with blank
/// lines between sentences, or a headed TSV with columns sentence,
/// event_start, event_end, score. The split is taken from the file stem.
std::vector<EventRecord> load_unified(const std::filesystem::path& path, Dataset dataset);

/// Closed list of modal operators that mark a non-normalized complement.
const std::vector<std::string>& modal_operators();

/// Picks the whole embedded clause when the complement carries negation, a
/// modal or an adverb, and the clause root otherwise. span_rule records which.
EventRecord resolve_event_span(const EventRecord& item, const conllu::Sentence& parse);

/// Applies resolve_event_span to every CB/RP record that has a parse. Parses
/// are matched by `# sent_id` against record ids, falling back to position.
std::vector<EventRecord> resolve_spans(const std::vector<EventRecord>& items,
                                       const std::vector<conllu::Sentence>& parses);

enum class StratifyKey { Verb, None };

struct SplitSpec {
  std::array<double, 3> ratios{0.44, 0.12, 0.44};
  std::uint64_t seed = 0;
  StratifyKey stratify = StratifyKey::Verb;

  void validate() const;
};

/// Sizes of a largest-remainder allocation of n items over the ratios.
std::array<std::size_t, 3> allocate(std::size_t n, const std::array<double, 3>& ratios);

/// Seeded, per-verb proportional split. Output order matches input order.
std::vector<EventRecord> stratified_split(const std::vector<EventRecord>& items,
                                          const SplitSpec& spec);

}  // namespace factuality::harmonizer
