#include "factuality/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace factuality::io {

using nlohmann::json;

std::optional<std::size_t> Table::column(std::string_view name) const {
  const auto wanted = to_lower(name);
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (to_lower(trim(header[i])) == wanted) return i;
  }
  return std::nullopt;
}

std::size_t Table::require_column(std::string_view name, const std::string& source) const {
  if (auto c = column(name)) return *c;
  throw Error(source + ": missing required column '" + std::string(name) + "'");
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Table parse_table(std::string_view text, char delimiter, const std::string& source) {
  Table table;
  std::vector<std::vector<std::string>> records;
  std::vector<std::size_t> starts;

  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t line = 1;
  std::size_t row_line = 1;

  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    const bool blank = row.size() == 1 && row[0].empty();
    if (!blank) {
      records.push_back(std::move(row));
      starts.push_back(row_line);
    }
    row.clear();
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    if (c == '"' && !field_started) {
      in_quotes = true;
      field_started = true;
    } else if (c == delimiter) {
      end_field();
    } else if (c == '\r') {
      // CRLF line endings
    } else if (c == '\n') {
      end_row();
      ++line;
      row_line = line;
    } else {
      field += c;
      field_started = true;
    }
  }
  if (in_quotes) {
    throw Error(source + ":" + std::to_string(row_line) + ": unterminated quoted field");
  }
  if (!field.empty() || !row.empty()) end_row();

  if (records.empty()) throw Error(source + ": empty table");
  table.header = std::move(records.front());
  for (auto& h : table.header) h = trim(h);
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != table.header.size()) {
      throw Error(source + ":" + std::to_string(starts[r]) + ": expected " +
                  std::to_string(table.header.size()) + " fields, found " +
                  std::to_string(records[r].size()));
    }
    table.rows.push_back(std::move(records[r]));
    table.lines.push_back(starts[r]);
  }
  return table;
}

Table read_table(const std::filesystem::path& path) {
  const char delim = path.extension() == ".csv" ? ',' : '\t';
  return parse_table(read_file(path), delim, path.string());
}

std::string trim(std::string_view text) {
  std::size_t b = 0;
  std::size_t e = text.size();
  while (b < e && std::isspace(static_cast<unsigned char>(text[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(text[e - 1]))) --e;
  return std::string(text.substr(b, e - b));
}

std::string to_lower(std::string_view text) {
  std::string out(text);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::vector<std::string> split_any(std::string_view text, std::string_view separators) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (separators.find(c) != std::string_view::npos) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::vector<std::string> simple_tokenize(std::string_view sentence) {
  std::vector<std::string> tokens;
  for (auto& word : split_any(sentence, " \t\n\r")) {
    std::vector<std::string> trailing;
    while (word.size() > 1 && std::string_view(".,?!;:").find(word.back()) != std::string_view::npos) {
      trailing.emplace_back(1, word.back());
      word.pop_back();
    }
    tokens.push_back(std::move(word));
    tokens.insert(tokens.end(), trailing.rbegin(), trailing.rend());
  }
  return tokens;
}

double parse_double(std::string_view text, const std::string& context) {
  const auto t = trim(text);
  double value = 0.0;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  if (!t.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (t.empty() || ec != std::errc() || ptr != last) {
    throw Error(context + ": not a number: '" + t + "'");
  }
  return value;
}

long long parse_int(std::string_view text, const std::string& context) {
  const auto t = trim(text);
  long long value = 0;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  if (!t.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (t.empty() || ec != std::errc() || ptr != last) {
    throw Error(context + ": not an integer: '" + t + "'");
  }
  return value;
}

json to_json(const EventRecord& r) {
  json j;
  j["id"] = r.id;
  j["dataset"] = std::string(to_string(r.dataset));
  j["split"] = std::string(to_string(r.split));
  j["sentence"] = r.sentence;
  j["tokens"] = r.tokens;
  j["event_span"] = {r.event_span.start, r.event_span.end};
  j["gold"] = r.gold.value();
  j["annotations"] = r.annotations;
  if (r.verb) j["verb"] = *r.verb;
  if (r.frame) j["frame"] = r.frame->name();
  if (r.polarity) j["polarity"] = std::string(to_string(*r.polarity));
  if (r.environment) j["environment"] = std::string(to_string(*r.environment));
  if (r.genre) j["genre"] = *r.genre;
  if (r.span_rule) j["span_rule"] = *r.span_rule;
  return j;
}

EventRecord record_from_json(const json& j) {
  EventRecord r;
  try {
    r.id = j.at("id").get<std::string>();
    r.dataset = parse_dataset(j.at("dataset").get<std::string>());
    r.split = parse_split(j.value("split", std::string("Unassigned")));
    r.sentence = j.at("sentence").get<std::string>();
    r.tokens = j.at("tokens").get<std::vector<std::string>>();
    const auto& span = j.at("event_span");
    if (!span.is_array() || span.size() != 2) throw Error("event_span must be [start, end)");
    r.event_span = {span[0].get<std::size_t>(), span[1].get<std::size_t>()};
    r.gold = Score(j.at("gold").get<double>());
    r.annotations = j.value("annotations", std::vector<double>{});
    if (j.contains("verb")) r.verb = j["verb"].get<std::string>();
    if (j.contains("frame")) r.frame = Frame(j["frame"].get<std::string>());
    if (j.contains("polarity")) r.polarity = parse_polarity(j["polarity"].get<std::string>());
    if (j.contains("environment")) {
      r.environment = parse_environment(j["environment"].get<std::string>());
    }
    if (j.contains("genre")) r.genre = j["genre"].get<std::string>();
    if (j.contains("span_rule")) r.span_rule = j["span_rule"].get<std::string>();
  } catch (const json::exception& e) {
    throw Error(std::string("malformed record: ") + e.what());
  }
  validate(r);
  return r;
}

std::vector<EventRecord> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<EventRecord> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (trim(line).empty()) continue;
    try {
      out.push_back(record_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw Error(path.string() + ":" + std::to_string(n) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(path.string() + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

std::string to_jsonl(const std::vector<EventRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    out += to_json(r).dump();
    out += '\n';
  }
  return out;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string fnv1a64_hex(std::string_view bytes) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(bytes)));
  return buf;
}

std::string source_key(const std::filesystem::path& path) {
  return path.stem().string();
}

}  // namespace factuality::io
