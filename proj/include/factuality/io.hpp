#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "factuality/core.hpp"

namespace factuality::io {

/// A delimited text table (CSV or TSV) with a header row.
/// Quoted fields follow RFC 4180: doubled quotes escape, embedded
/// delimiters and newlines are allowed inside quotes.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  /// 1-based source line on which each row starts.
  std::vector<std::size_t> lines;

  std::optional<std::size_t> column(std::string_view name) const;
  std::size_t require_column(std::string_view name, const std::string& source) const;
};

/// Delimiter is ',' for .csv files and '\t' otherwise.
Table read_table(const std::filesystem::path& path);
Table parse_table(std::string_view text, char delimiter, const std::string& source);

std::string read_file(const std::filesystem::path& path);

/// Splits a sentence on whitespace and detaches sentence-final punctuation.
std::vector<std::string> simple_tokenize(std::string_view sentence);

/// Splits on any of the given separator characters, dropping empty pieces.
std::vector<std::string> split_any(std::string_view text, std::string_view separators);

std::string trim(std::string_view text);
std::string to_lower(std::string_view text);

/// Strict numeric parse of a whole field; throws Error with `context` on failure.
double parse_double(std::string_view text, const std::string& context);
long long parse_int(std::string_view text, const std::string& context);

nlohmann::json to_json(const EventRecord& r);
EventRecord record_from_json(const nlohmann::json& j);

std::vector<EventRecord> read_jsonl(const std::filesystem::path& path);
std::string to_jsonl(const std::vector<EventRecord>& records);

/// 64-bit FNV-1a, rendered as 16 lowercase hex digits.
std::string fnv1a64_hex(std::string_view bytes);
std::uint64_t fnv1a64(std::string_view bytes);

/// Stem used in record ids ("test" for ".../test.conll").
std::string source_key(const std::filesystem::path& path);

}  // namespace factuality::io
