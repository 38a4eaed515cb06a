#include "factuality/harmonizer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_map>

#include "factuality/io.hpp"

namespace factuality::harmonizer {

using nlohmann::json;

namespace {

bool is_punct(const std::string& token) {
  return !token.empty() && std::all_of(token.begin(), token.end(), [](unsigned char c) {
    return std::ispunct(c) != 0;
  });
}

/// Default event position for bleached or template sentences: the verb after
/// the last infinitival "to", otherwise the last word.
Span template_event_span(const std::vector<std::string>& tokens) {
  for (std::size_t i = tokens.size(); i-- > 0;) {
    if (io::to_lower(tokens[i]) == "to" && i + 1 < tokens.size() && !is_punct(tokens[i + 1])) {
      return {i + 1, i + 2};
    }
  }
  for (std::size_t i = tokens.size(); i-- > 0;) {
    if (!is_punct(tokens[i])) return {i, i + 1};
  }
  return {0, tokens.size()};
}

/// Locates the complement's tokens inside the sentence (case-insensitive).
std::optional<Span> find_phrase(const std::vector<std::string>& tokens, const std::string& phrase) {
  auto needle = io::simple_tokenize(phrase);
  while (!needle.empty() && is_punct(needle.back())) needle.pop_back();
  if (needle.empty() || needle.size() > tokens.size()) return std::nullopt;
  for (std::size_t i = 0; i + needle.size() <= tokens.size(); ++i) {
    bool match = true;
    for (std::size_t k = 0; k < needle.size() && match; ++k) {
      match = io::to_lower(tokens[i + k]) == io::to_lower(needle[k]);
    }
    if (match) return Span{i, i + needle.size()};
  }
  return std::nullopt;
}

Span sentence_span(const std::vector<std::string>& tokens) {
  std::size_t end = tokens.size();
  while (end > 1 && is_punct(tokens[end - 1])) --end;
  return {0, end};
}

std::string at(const io::Table& t, std::size_t row, std::optional<std::size_t> col) {
  return col ? io::trim(t.rows[row][*col]) : std::string();
}

std::string where(const std::filesystem::path& path, const io::Table& t, std::size_t row) {
  return path.string() + ":" + std::to_string(t.lines[row]);
}

/// Parses a raw annotation that must be an integer within [lo, hi].
double integral_annotation(const std::string& text, double lo, double hi, const std::string& ctx) {
  const double v = io::parse_double(text, ctx);
  if (v != std::floor(v)) throw Error(ctx + ": annotation must be an integer: " + text);
  if (v < lo || v > hi) {
    std::ostringstream msg;
    msg << ctx << ": annotation " << text << " outside [" << lo << ", " << hi << "]";
    throw Error(msg.str());
  }
  return v;
}

Split optional_split(const io::Table& t, std::size_t row, std::optional<std::size_t> col,
                     const std::string& ctx) {
  if (!col) return Split::Unassigned;
  try {
    return parse_split(at(t, row, col));
  } catch (const Error& e) {
    throw Error(ctx + ": " + e.what());
  }
}

Split split_from_stem(const std::filesystem::path& path) {
  const auto stem = io::to_lower(path.stem().string());
  if (stem.find("train") != std::string::npos) return Split::Train;
  if (stem.find("dev") != std::string::npos) return Split::Dev;
  if (stem.find("test") != std::string::npos) return Split::Test;
  return Split::Unassigned;
}

/// Reads the annotation list of one RP/CB row from either a single list
/// column or numbered annotation_k columns.
std::vector<std::string> row_annotations(const io::Table& t, std::size_t row,
                                         std::optional<std::size_t> list_col,
                                         const std::vector<std::size_t>& numbered) {
  if (list_col) return io::split_any(t.rows[row][*list_col], ",; \t");
  std::vector<std::string> out;
  for (auto c : numbered) {
    auto v = io::trim(t.rows[row][c]);
    if (!v.empty()) out.push_back(std::move(v));
  }
  return out;
}

std::vector<std::size_t> numbered_columns(const io::Table& t, const std::string& prefix) {
  std::vector<std::pair<int, std::size_t>> found;
  for (std::size_t c = 0; c < t.header.size(); ++c) {
    const auto h = io::to_lower(t.header[c]);
    if (h.rfind(prefix, 0) == 0 && h.size() > prefix.size()) {
      const auto suffix = h.substr(prefix.size());
      if (std::all_of(suffix.begin(), suffix.end(), ::isdigit)) {
        found.emplace_back(std::stoi(suffix), c);
      }
    }
  }
  std::sort(found.begin(), found.end());
  std::vector<std::size_t> out;
  for (auto& [_, c] : found) out.push_back(c);
  return out;
}

}  // namespace

json to_json(const FilterReport& r) {
  return json{{"rule", r.rule},
              {"kept", r.kept},
              {"removed", r.removed},
              {"removed_ids", r.removed_ids},
              {"warnings", r.warnings}};
}

Frame megaveridicality_frame(const std::string& frame, const std::string& voice) {
  if (Frame::is_registered(frame)) return Frame(frame);
  const bool passive = io::to_lower(voice) == "passive";
  const auto f = io::to_lower(frame);
  if (f == "that_s") return Frame(passive ? "was_Ved_that_S" : "V_that_S");
  if (f == "for_np_to_vp") return Frame("V_for_NP_to_VP");
  if (f == "np_to_vpeventive") return Frame(passive ? "NP_was_Ved_to_VP_ev" : "V_NP_to_VP_ev");
  if (f == "np_to_vpstative") return Frame(passive ? "NP_was_Ved_to_VP_st" : "V_NP_to_VP_st");
  if (f == "to_vpeventive") return Frame("V_to_VP_ev");
  if (f == "to_vpstative") return Frame("V_to_VP_st");
  throw Error("unknown MegaVeridicality frame '" + frame + "' (voice '" + voice + "')");
}

std::vector<EventRecord> load_megaveridicality(const std::filesystem::path& path) {
  const auto table = io::read_table(path);
  const auto src = path.string();
  const auto c_verb = table.require_column("verb", src);
  const auto c_frame = table.require_column("frame", src);
  const auto c_pol = table.require_column("polarity", src);
  const auto c_sent = table.require_column("sentence", src);
  auto c_resp = table.column("veridicality");
  if (!c_resp) c_resp = table.require_column("response", src);
  const auto c_voice = table.column("voice");
  const auto c_split = table.column("split");

  struct Item {
    std::size_t row;
    std::vector<double> responses;
  };
  std::vector<Item> items;
  std::unordered_map<std::string, std::size_t> by_key;

  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto ctx = where(path, table, r);
    const auto verb = at(table, r, c_verb);
    const auto sentence = at(table, r, c_sent);
    if (verb.empty() || sentence.empty()) throw Error(ctx + ": empty verb or sentence");
    const auto key = io::to_lower(verb) + '\x1f' + at(table, r, c_frame) + '\x1f' +
                     at(table, r, c_voice) + '\x1f' + io::to_lower(at(table, r, c_pol)) + '\x1f' +
                     sentence;

    const auto resp = io::to_lower(at(table, r, c_resp));
    double value = 0.0;
    if (resp == "yes") value = 3.0;
    else if (resp == "maybe") value = 0.0;
    else if (resp == "no") value = -3.0;
    else throw Error(ctx + ": unknown response '" + at(table, r, c_resp) + "'");

    auto [it, inserted] = by_key.try_emplace(key, items.size());
    if (inserted) items.push_back({r, {}});
    items[it->second].responses.push_back(value);
  }

  std::vector<EventRecord> out;
  out.reserve(items.size());
  const auto stem = io::source_key(path);
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto r = items[i].row;
    const auto ctx = where(path, table, r);
    EventRecord rec;
    rec.id = make_record_id(Dataset::MV, stem, i);
    rec.dataset = Dataset::MV;
    rec.split = optional_split(table, r, c_split, ctx);
    rec.sentence = at(table, r, c_sent);
    rec.tokens = io::simple_tokenize(rec.sentence);
    rec.event_span = template_event_span(rec.tokens);
    rec.annotations = items[i].responses;
    rec.gold = Score(mean(rec.annotations));
    rec.verb = io::to_lower(at(table, r, c_verb));
    try {
      rec.frame = megaveridicality_frame(at(table, r, c_frame), at(table, r, c_voice));
      rec.polarity = parse_polarity(at(table, r, c_pol));
    } catch (const Error& e) {
      throw Error(ctx + ": " + e.what());
    }
    rec.environment = *rec.polarity == Polarity::Positive ? Environment::None : Environment::Negation;
    validate(rec);
    out.push_back(std::move(rec));
  }
  return out;
}

std::set<std::string> read_id_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::set<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    const auto t = io::trim(line);
    if (t.empty() || t[0] == '#') continue;
    ids.insert(t);
  }
  return ids;
}

LoadResult load_rp(const std::filesystem::path& path, const RpOptions& options) {
  const auto table = io::read_table(path);
  const auto src = path.string();
  const auto c_sent = table.require_column("sentence", src);
  const auto c_verb = table.require_column("verb", src);
  const auto c_frame = table.require_column("frame", src);
  const auto c_pol = table.require_column("polarity", src);
  const auto c_list = table.column("annotations");
  const auto numbered = numbered_columns(table, "annotation_");
  if (!c_list && numbered.empty()) {
    throw Error(src + ": needs an 'annotations' column or annotation_1..k columns");
  }
  const auto c_comp = table.column("complement");
  const auto c_split = table.column("split");
  const auto c_genre = table.column("genre");

  LoadResult result;
  FilterReport span_filter;
  span_filter.rule = "single_span_exclusion";
  FilterReport sign_filter;
  sign_filter.rule = "sign_disagreement";
  const auto stem = io::source_key(path);

  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto ctx = where(path, table, r);
    EventRecord rec;
    rec.id = make_record_id(Dataset::RP, stem, r);
    rec.dataset = Dataset::RP;
    rec.split = optional_split(table, r, c_split, ctx);
    rec.sentence = at(table, r, c_sent);
    if (rec.sentence.empty()) throw Error(ctx + ": empty sentence");
    rec.tokens = io::simple_tokenize(rec.sentence);

    const auto raw = row_annotations(table, r, c_list, numbered);
    if (raw.empty()) throw Error(ctx + ": no annotations");
    for (const auto& a : raw) rec.annotations.push_back(1.5 * integral_annotation(a, -2, 2, ctx));
    rec.gold = Score(mean(rec.annotations));

    rec.verb = io::to_lower(at(table, r, c_verb));
    try {
      const auto frame = io::to_lower(at(table, r, c_frame));
      if (frame == "that") rec.frame = Frame("V_that_S");
      else if (frame == "to") rec.frame = Frame("V_to_VP");
      else rec.frame = Frame(at(table, r, c_frame));
      rec.polarity = parse_polarity(at(table, r, c_pol));
    } catch (const Error& e) {
      throw Error(ctx + ": " + e.what());
    }
    rec.environment = *rec.polarity == Polarity::Positive ? Environment::None : Environment::Negation;
    if (c_genre && !at(table, r, c_genre).empty()) rec.genre = at(table, r, c_genre);

    std::optional<Span> span;
    if (c_comp) span = find_phrase(rec.tokens, at(table, r, c_comp));
    rec.event_span = span ? *span : template_event_span(rec.tokens);
    validate(rec);

    if (options.multi_span_ids.count(rec.id)) {
      ++span_filter.removed;
      span_filter.removed_ids.push_back(rec.id);
      continue;
    }
    ++span_filter.kept;

    const bool has_pos = std::any_of(rec.annotations.begin(), rec.annotations.end(),
                                     [](double a) { return a > 0; });
    const bool has_neg = std::any_of(rec.annotations.begin(), rec.annotations.end(),
                                     [](double a) { return a < 0; });
    if (has_pos && has_neg) {
      ++sign_filter.removed;
      sign_filter.removed_ids.push_back(rec.id);
      continue;
    }
    ++sign_filter.kept;
    result.records.push_back(std::move(rec));
  }
  result.filters = {std::move(span_filter), std::move(sign_filter)};
  return result;
}

namespace {

/// Index of the bin among [-3,-1], {0}, [1,3].
int agreement_bin(double a) { return a < 0 ? 0 : (a == 0 ? 1 : 2); }

bool high_agreement(const std::vector<double>& annotations) {
  std::array<std::size_t, 3> bins{};
  for (double a : annotations) ++bins[agreement_bin(a)];
  const auto top = *std::max_element(bins.begin(), bins.end());
  // top / n >= 0.8 in exact integer arithmetic
  return top * 5 >= annotations.size() * 4;
}

}  // namespace

LoadResult load_cb(const std::filesystem::path& path) {
  const auto table = io::read_table(path);
  const auto src = path.string();
  const bool long_format = table.column("uID") && table.column("Answer");

  struct Item {
    std::size_t row;
    std::vector<double> annotations;
  };
  std::vector<Item> items;

  std::size_t c_verb, c_env, c_sent;
  std::optional<std::size_t> c_comp, c_genre, c_split;
  if (long_format) {
    const auto c_uid = table.require_column("uID", src);
    const auto c_answer = table.require_column("Answer", src);
    c_verb = table.require_column("Verb", src);
    c_env = table.require_column("Embedding", src);
    c_sent = table.require_column("Target", src);
    c_comp = table.column("Prompt");
    std::unordered_map<std::string, std::size_t> by_uid;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      const auto ctx = where(path, table, r);
      const auto uid = at(table, r, c_uid);
      if (uid.empty()) throw Error(ctx + ": empty uID");
      auto [it, inserted] = by_uid.try_emplace(uid, items.size());
      if (inserted) items.push_back({r, {}});
      items[it->second].annotations.push_back(integral_annotation(at(table, r, c_answer), -3, 3, ctx));
    }
  } else {
    c_sent = table.require_column("sentence", src);
    c_verb = table.require_column("verb", src);
    c_env = table.require_column("environment", src);
    c_comp = table.column("complement");
    const auto c_list = table.column("annotations");
    const auto numbered = numbered_columns(table, "annotation_");
    if (!c_list && numbered.empty()) {
      throw Error(src + ": needs an 'annotations' column or annotation_1..k columns");
    }
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      const auto ctx = where(path, table, r);
      Item item{r, {}};
      for (const auto& a : row_annotations(table, r, c_list, numbered)) {
        item.annotations.push_back(integral_annotation(a, -3, 3, ctx));
      }
      if (item.annotations.empty()) throw Error(ctx + ": no annotations");
      items.push_back(std::move(item));
    }
  }
  c_genre = table.column("genre");
  c_split = table.column("split");

  LoadResult result;
  FilterReport agreement;
  agreement.rule = "agreement_80pct";
  const auto stem = io::source_key(path);

  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto r = items[i].row;
    const auto ctx = where(path, table, r);
    EventRecord rec;
    rec.id = make_record_id(Dataset::CB, stem, i);
    rec.dataset = Dataset::CB;
    rec.split = optional_split(table, r, c_split, ctx);
    rec.sentence = at(table, r, c_sent);
    if (rec.sentence.empty()) throw Error(ctx + ": empty sentence");
    rec.tokens = io::simple_tokenize(rec.sentence);
    rec.annotations = items[i].annotations;
    rec.gold = Score(mean(rec.annotations));
    rec.verb = io::to_lower(at(table, r, c_verb));
    rec.frame = Frame("V_that_S");
    try {
      rec.environment = parse_environment(at(table, r, c_env));
    } catch (const Error& e) {
      throw Error(ctx + ": " + e.what());
    }
    if (c_genre && !at(table, r, c_genre).empty()) rec.genre = at(table, r, c_genre);
    std::optional<Span> span;
    if (c_comp) span = find_phrase(rec.tokens, at(table, r, c_comp));
    rec.event_span = span ? *span : sentence_span(rec.tokens);
    validate(rec);

    if (rec.annotations.size() < 8) {
      agreement.warnings.push_back(rec.id + ": only " + std::to_string(rec.annotations.size()) +
                                   " annotations");
    }
    if (!high_agreement(rec.annotations)) {
      ++agreement.removed;
      agreement.removed_ids.push_back(rec.id);
      continue;
    }
    ++agreement.kept;
    result.records.push_back(std::move(rec));
  }
  result.filters = {std::move(agreement)};
  return result;
}

std::vector<EventRecord> load_unified(const std::filesystem::path& path, Dataset dataset) {
  const auto text = io::read_file(path);
  const auto src = path.string();
  const auto stem = io::source_key(path);
  const auto split = split_from_stem(path);
  std::vector<EventRecord> out;

  auto make = [&](std::vector<std::string> tokens, Span span, double score, const std::string& ctx,
                  std::string sentence) {
    if (!in_score_range(score)) throw Error(ctx + ": score outside [-3, 3]: " + std::to_string(score));
    if (!(span.start < span.end && span.end <= tokens.size())) {
      throw Error(ctx + ": event span outside the sentence");
    }
    EventRecord rec;
    rec.id = make_record_id(dataset, stem, out.size());
    rec.dataset = dataset;
    rec.split = split;
    rec.sentence = std::move(sentence);
    rec.tokens = std::move(tokens);
    rec.event_span = span;
    rec.gold = Score(score);
    out.push_back(std::move(rec));
  };

  std::istringstream probe(text);
  std::string first;
  while (std::getline(probe, first) && io::trim(first).empty()) {
  }
  const bool headed = io::to_lower(first).find("sentence") != std::string::npos &&
                      io::to_lower(first).find("score") != std::string::npos;

  if (headed) {
    const auto table = io::parse_table(text, '\t', src);
    const auto c_sent = table.require_column("sentence", src);
    const auto c_start = table.require_column("event_start", src);
    const auto c_end = table.column("event_end");
    const auto c_score = table.require_column("score", src);
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      const auto ctx = where(path, table, r);
      const auto sentence = at(table, r, c_sent);
      auto tokens = io::split_any(sentence, " ");
      const auto start = io::parse_int(at(table, r, c_start), ctx);
      const auto end = c_end ? io::parse_int(at(table, r, c_end), ctx) : start + 1;
      if (start < 0 || end < 0) throw Error(ctx + ": event span outside the sentence");
      make(std::move(tokens), {static_cast<std::size_t>(start), static_cast<std::size_t>(end)},
           io::parse_double(at(table, r, c_score), ctx), ctx, sentence);
    }
    return out;
  }

  // token-per-line blocks
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> tokens;
  std::vector<std::pair<std::size_t, double>> scored;
  std::vector<std::size_t> scored_lines;
  auto flush = [&] {
    std::string sentence;
    for (const auto& t : tokens) sentence += (sentence.empty() ? "" : " ") + t;
    for (std::size_t k = 0; k < scored.size(); ++k) {
      make(tokens, {scored[k].first, scored[k].first + 1}, scored[k].second,
           src + ":" + std::to_string(scored_lines[k]), sentence);
    }
    tokens.clear();
    scored.clear();
    scored_lines.clear();
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (io::trim(line).empty()) {
      flush();
      continue;
    }
    const auto cols = io::split_any(line, "\t");
    const auto ctx = src + ":" + std::to_string(line_no);
    if (cols.size() < 3) throw Error(ctx + ": expected index, token and score columns");
    const auto& value = cols.back();
    if (value != "_") {
      scored.emplace_back(tokens.size(), io::parse_double(value, ctx));
      scored_lines.push_back(line_no);
    }
    tokens.push_back(cols[1]);
  }
  flush();
  return out;
}

const std::vector<std::string>& modal_operators() {
  static const std::vector<std::string> kModals = {
      "should", "could", "can", "must", "perhaps", "might",
      "maybe", "may", "shall", "have to", "would"};
  return kModals;
}

namespace {

bool is_single_word_modal(const std::string& word) {
  const auto& m = modal_operators();
  return word.find(' ') == std::string::npos && std::find(m.begin(), m.end(), word) != m.end();
}

bool is_have(const std::string& w) { return w == "have" || w == "has" || w == "had"; }

}  // namespace

EventRecord resolve_event_span(const EventRecord& item, const conllu::Sentence& parse) {
  if (item.dataset != Dataset::CB && item.dataset != Dataset::RP) {
    throw Error(item.id + ": span resolution applies to CB and RP items only");
  }
  bool same = parse.tokens.size() == item.tokens.size();
  for (std::size_t i = 0; same && i < item.tokens.size(); ++i) {
    same = parse.tokens[i].form == item.tokens[i];
  }
  if (!same) throw Error(item.id + ": parse tokens do not match the sentence tokens");

  auto is_complement = [&](std::size_t i) {
    const auto rel = conllu::base_relation(parse.tokens[i].deprel);
    return rel == "ccomp" || rel == "xcomp";
  };

  std::optional<std::size_t> root;
  if (item.verb) {
    for (std::size_t v = 0; v < parse.tokens.size() && !root; ++v) {
      const auto& t = parse.tokens[v];
      if (io::to_lower(t.lemma) != *item.verb && io::to_lower(t.form) != *item.verb) continue;
      for (auto c : parse.children(v)) {
        if (is_complement(c)) {
          root = c;
          break;
        }
      }
    }
  }
  for (std::size_t i = 0; i < parse.tokens.size() && !root; ++i) {
    if (is_complement(i)) root = i;
  }
  if (!root) throw Error(item.id + ": no embedded clause found in the parse");

  std::vector<std::size_t> clause;
  for (auto i : parse.subtree(*root)) {
    const bool leading_mark = i < *root && parse.tokens[i].head == static_cast<int>(*root) + 1 &&
                              conllu::base_relation(parse.tokens[i].deprel) == "mark";
    if (!leading_mark) clause.push_back(i);
  }

  std::string reason;
  for (std::size_t k = 0; k < clause.size() && reason.empty(); ++k) {
    const auto& t = parse.tokens[clause[k]];
    const auto lemma = io::to_lower(t.lemma);
    const auto rel = conllu::base_relation(t.deprel);
    if (rel == "neg" || (rel == "advmod" && (lemma == "not" || lemma == "n't" || lemma == "never"))) {
      reason = "neg";
    }
  }
  for (std::size_t k = 0; k < clause.size() && reason.empty(); ++k) {
    const auto& t = parse.tokens[clause[k]];
    const auto form = io::to_lower(t.form);
    const auto lemma = io::to_lower(t.lemma);
    if (is_single_word_modal(form) || is_single_word_modal(lemma)) reason = "modal";
    if (k + 1 < clause.size() && clause[k + 1] == clause[k] + 1 && (is_have(form) || lemma == "have") &&
        io::to_lower(parse.tokens[clause[k + 1]].form) == "to") {
      reason = "modal";
    }
  }
  for (std::size_t k = 0; k < clause.size() && reason.empty(); ++k) {
    const auto& t = parse.tokens[clause[k]];
    if (t.upos == "ADV" || t.xpos.rfind("RB", 0) == 0) reason = "adverb";
  }

  EventRecord out = item;
  if (reason.empty()) {
    out.event_span = {*root, *root + 1};
    out.span_rule = "root";
  } else {
    out.event_span = {clause.front(), clause.back() + 1};
    out.span_rule = "clause:" + reason;
  }
  return out;
}

std::vector<EventRecord> resolve_spans(const std::vector<EventRecord>& items,
                                       const std::vector<conllu::Sentence>& parses) {
  std::unordered_map<std::string, std::size_t> by_id;
  for (std::size_t i = 0; i < parses.size(); ++i) {
    if (parses[i].sent_id) by_id.emplace(*parses[i].sent_id, i);
  }
  const bool positional = by_id.empty();
  if (positional && parses.size() != items.size()) {
    throw Error("parses carry no sent_id and their count (" + std::to_string(parses.size()) +
                ") differs from the item count (" + std::to_string(items.size()) + ")");
  }
  std::vector<EventRecord> out;
  out.reserve(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& item = items[i];
    if (item.dataset != Dataset::CB && item.dataset != Dataset::RP) {
      out.push_back(item);
      continue;
    }
    if (positional) {
      out.push_back(resolve_event_span(item, parses[i]));
    } else if (auto it = by_id.find(item.id); it != by_id.end()) {
      out.push_back(resolve_event_span(item, parses[it->second]));
    } else {
      out.push_back(item);
    }
  }
  return out;
}

void SplitSpec::validate() const {
  double sum = 0.0;
  for (double r : ratios) {
    if (!(r >= 0.0) || !std::isfinite(r)) throw Error("split ratios must be nonnegative");
    sum += r;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw Error("split ratios must sum to 1");
}

std::array<std::size_t, 3> allocate(std::size_t n, const std::array<double, 3>& ratios) {
  std::array<std::size_t, 3> sizes{};
  std::array<double, 3> frac{};
  std::size_t assigned = 0;
  for (std::size_t k = 0; k < 3; ++k) {
    const double quota = static_cast<double>(n) * ratios[k];
    const double base = std::floor(quota + 1e-9);
    sizes[k] = static_cast<std::size_t>(base);
    frac[k] = quota - base;
    assigned += sizes[k];
  }
  std::array<std::size_t, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
  for (std::size_t k = 0; assigned < n; k = (k + 1) % 3) {
    if (ratios[order[k]] > 0.0) {
      ++sizes[order[k]];
      ++assigned;
    }
  }
  return sizes;
}

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t key) {
  // splitmix64 finalizer over the combined value
  std::uint64_t z = seed ^ (key + 0x9e3779b97f4a7c15ull + (seed << 6) + (seed >> 2));
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

}  // namespace

std::vector<EventRecord> stratified_split(const std::vector<EventRecord>& items,
                                          const SplitSpec& spec) {
  spec.validate();
  std::map<std::string, std::vector<std::size_t>> groups;
  std::vector<std::string> missing;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (spec.stratify == StratifyKey::Verb) {
      if (!items[i].verb || items[i].verb->empty()) {
        missing.push_back(items[i].id);
        continue;
      }
      groups[*items[i].verb].push_back(i);
    } else {
      groups[""].push_back(i);
    }
  }
  if (!missing.empty()) {
    std::string msg = "verb stratification needs a verb on every item; missing for:";
    for (const auto& id : missing) msg += " " + id;
    throw Error(msg);
  }

  std::vector<EventRecord> out = items;
  for (auto& [key, members] : groups) {
    std::sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
      return items[a].id != items[b].id ? items[a].id < items[b].id : a < b;
    });
    std::mt19937_64 rng(mix_seed(spec.seed, io::fnv1a64(key)));
    for (std::size_t i = members.size(); i > 1; --i) {
      std::swap(members[i - 1], members[uniform_below(rng, i)]);
    }
    const auto sizes = allocate(members.size(), spec.ratios);
    for (std::size_t k = 0; k < members.size(); ++k) {
      out[members[k]].split = k < sizes[0]             ? Split::Train
                              : k < sizes[0] + sizes[1] ? Split::Dev
                                                        : Split::Test;
    }
  }
  return out;
}

}  // namespace factuality::harmonizer
