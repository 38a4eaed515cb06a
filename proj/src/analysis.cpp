#include "factuality/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <unordered_map>

#include "factuality/io.hpp"

namespace factuality::analysis {

using nlohmann::json;

PredictionSet parse_predictions(std::string_view text, const std::string& source, std::string model_name) {
  PredictionSet out;
  out.model_name = std::move(model_name);
  out.provenance = source;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    const auto t = io::trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto ctx = source + ":" + std::to_string(n);
    const auto cols = io::split_any(t, "\t");
    if (cols.size() != 2) throw Error(ctx + ": expected 'id<TAB>score'");
    const double v = io::parse_double(cols[1], ctx);
    if (!in_score_range(v)) throw Error(ctx + ": prediction outside [-3, 3]");
    if (!out.entries.emplace(cols[0], Score(v)).second) throw Error(ctx + ": duplicate id " + cols[0]);
  }
  return out;
}

PredictionSet read_predictions(const std::filesystem::path& path) {
  return parse_predictions(io::read_file(path), path.string(), path.stem().string());
}

std::string to_tsv(const PredictionSet& preds) {
  std::ostringstream out;
  out << std::setprecision(17);
  for (const auto& [id, s] : preds.entries) out << id << '\t' << s.value() << '\n';
  return out.str();
}

PredictionSet average(const std::vector<PredictionSet>& runs) {
  if (runs.empty()) throw Error("no prediction sets to average");
  if (runs.size() == 1) return runs.front();
  std::map<std::string, std::pair<double, std::size_t>> acc;
  std::string names;
  for (const auto& run : runs) {
    names += (names.empty() ? "" : "+") + run.model_name;
    for (const auto& [id, s] : run.entries) {
      auto& cell = acc[id];
      cell.first += s.value();
      ++cell.second;
    }
  }
  PredictionSet out;
  out.model_name = "mean(" + names + ")";
  out.provenance = "mean of " + std::to_string(runs.size()) + " runs";
  for (const auto& [id, cell] : acc) {
    out.entries.emplace(id, Score(std::clamp(cell.first / static_cast<double>(cell.second), kScoreMin, kScoreMax)));
  }
  return out;
}

namespace {

void require_predictions(const std::vector<const EventRecord*>& items, const PredictionSet& preds) {
  std::vector<std::string> missing;
  for (const auto* item : items) {
    if (!preds.entries.count(item->id)) missing.push_back(item->id);
  }
  if (!missing.empty()) {
    std::string msg = "missing predictions for " + std::to_string(missing.size()) + " items:";
    for (const auto& id : missing) msg += " " + id;
    throw Error(msg);
  }
}

std::vector<const EventRecord*> all_of(const std::vector<EventRecord>& items) {
  std::vector<const EventRecord*> out;
  out.reserve(items.size());
  for (const auto& i : items) out.push_back(&i);
  return out;
}

std::string facet_value(const EventRecord& item, const std::vector<oracle::Feature>& keys) {
  std::string v;
  for (auto f : keys) {
    const auto value = oracle::feature_value(item, f);
    if (!value) throw Error(item.id + ": missing feature '" + std::string(oracle::to_string(f)) + "'");
    if (!v.empty()) v += " / ";
    v += *value;
  }
  return v;
}

}  // namespace

std::vector<DatasetMetrics> evaluate(const std::vector<EventRecord>& items, const std::vector<PredictionSet>& runs,
                                     const EvaluateOptions& options) {
  const auto preds = average(runs);
  std::map<Dataset, std::vector<const EventRecord*>> by_dataset;
  for (const auto& item : items) {
    if (options.split && item.split != *options.split) continue;
    by_dataset[item.dataset].push_back(&item);
  }
  std::vector<const EventRecord*> evaluated;
  for (const auto& [_, v] : by_dataset) evaluated.insert(evaluated.end(), v.begin(), v.end());
  require_predictions(evaluated, preds);

  std::vector<DatasetMetrics> out;
  for (const auto& [dataset, members] : by_dataset) {
    std::vector<double> p, g;
    for (const auto* item : members) {
      p.push_back(preds.entries.at(item->id).value());
      g.push_back(item->gold.value());
    }
    DatasetMetrics m;
    m.dataset = dataset;
    m.n = members.size();
    m.mae = stats::mae(p, g);
    m.pearson = members.size() >= 2 ? stats::pearson(p, g) : std::nullopt;
    out.push_back(m);
  }
  return out;
}

StudyResult expected_inference_study(const std::vector<EventRecord>& items, const PredictionSet& preds,
                                     const std::map<std::string, double>& expected,
                                     const stats::MixedFitOptions& options) {
  StudyResult result;
  std::vector<double> x, y;
  std::vector<std::string> groups;
  for (const auto& item : items) {
    auto p = preds.entries.find(item.id);
    auto e = expected.find(item.id);
    if (p == preds.entries.end() || e == expected.end()) continue;
    if (item.dataset == Dataset::UDSIH2) {
      ++result.excluded_udsih2;
      continue;
    }
    StudyRow row{item.id, item.dataset, std::abs(e->second - item.gold.value()),
                 std::abs(p->second.value() - item.gold.value())};
    x.push_back(row.expected_error);
    y.push_back(row.model_error);
    groups.emplace_back(to_string(item.dataset));
    result.rows.push_back(std::move(row));
  }
  if (result.rows.empty()) throw Error("expected-inference study: no ids shared by items, predictions and oracle");
  result.model = stats::fit_mixed_linear(x, y, groups, options);
  result.all_slopes_positive = std::all_of(result.model.groups.begin(), result.model.groups.end(),
                                           [](const stats::GroupEffect& g) { return g.slope > 0.0; });
  return result;
}

std::size_t top_count(std::size_t n, double frac) {
  if (!(frac > 0.0 && frac <= 1.0)) throw Error("top fraction must lie in (0, 1]");
  if (n == 0) return 0;
  const auto k = static_cast<std::size_t>(std::floor(frac * static_cast<double>(n) + 1e-9));
  return std::clamp<std::size_t>(k, 1, n);
}

std::vector<RankedError> rank_errors(const std::vector<EventRecord>& items, const PredictionSet& preds,
                                     double frac) {
  const auto keep = top_count(items.size(), frac);
  require_predictions(all_of(items), preds);
  std::vector<RankedError> ranked;
  ranked.reserve(items.size());
  for (const auto& item : items) {
    const double p = preds.entries.at(item.id).value();
    ranked.push_back({item.id, item.dataset, item.gold.value(), p, std::abs(p - item.gold.value())});
  }
  std::sort(ranked.begin(), ranked.end(), [](const RankedError& a, const RankedError& b) {
    return a.abs_error != b.abs_error ? a.abs_error > b.abs_error : a.id < b.id;
  });
  ranked.resize(keep);
  return ranked;
}

std::string to_tsv(const std::vector<RankedError>& ranked) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "rank\tid\tdataset\tgold\tprediction\tabs_error\n";
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    const auto& r = ranked[i];
    out << i + 1 << '\t' << r.id << '\t' << to_string(r.dataset) << '\t' << r.gold << '\t' << r.prediction
        << '\t' << r.abs_error << '\n';
  }
  return out.str();
}

std::vector<RankedError> read_ranked(const std::filesystem::path& path) {
  const auto table = io::parse_table(io::read_file(path), '\t', path.string());
  const auto src = path.string();
  const auto c_id = table.require_column("id", src);
  const auto c_ds = table.require_column("dataset", src);
  const auto c_gold = table.require_column("gold", src);
  const auto c_pred = table.require_column("prediction", src);
  const auto c_err = table.require_column("abs_error", src);
  std::vector<RankedError> out;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto ctx = src + ":" + std::to_string(table.lines[r]);
    const auto& row = table.rows[r];
    out.push_back({row[c_id], parse_dataset(row[c_ds]), io::parse_double(row[c_gold], ctx),
                   io::parse_double(row[c_pred], ctx), io::parse_double(row[c_err], ctx)});
  }
  return out;
}

Dispersion group_dispersion(const std::vector<EventRecord>& items, const PredictionSet& preds,
                            const std::vector<oracle::Feature>& keys, VarianceConvention convention) {
  require_predictions(all_of(items), preds);
  std::map<std::string, std::vector<const EventRecord*>> groups;
  for (const auto& item : items) groups[facet_value(item, keys)].push_back(&item);

  auto variance = [&](const std::vector<double>& v) {
    const double m = mean(v);
    double ss = 0.0;
    for (double a : v) ss += (a - m) * (a - m);
    const double denom = convention == VarianceConvention::Sample ? static_cast<double>(v.size() - 1)
                                                                  : static_cast<double>(v.size());
    return ss / denom;
  };

  Dispersion d;
  double pred_sum = 0.0, gold_sum = 0.0;
  for (const auto& [_, members] : groups) {
    if (members.size() < 2) continue;
    std::vector<double> p, g;
    for (const auto* item : members) {
      p.push_back(preds.entries.at(item->id).value());
      g.push_back(item->gold.value());
    }
    pred_sum += variance(p);
    gold_sum += variance(g);
    ++d.groups;
    d.items += members.size();
  }
  if (d.groups == 0) throw Error("group dispersion: no group has two or more items");
  d.mean_prediction_variance = pred_sum / static_cast<double>(d.groups);
  d.mean_gold_variance = gold_sum / static_cast<double>(d.groups);
  return d;
}

namespace {

std::set<std::string> read_word_list(const std::filesystem::path& path) {
  std::set<std::string> out;
  std::istringstream in(io::read_file(path));
  std::string line;
  while (std::getline(in, line)) {
    const auto t = io::trim(line);
    if (!t.empty() && t[0] != '#') out.insert(io::to_lower(t));
  }
  return out;
}

}  // namespace

VerbClasses read_verb_classes(const std::filesystem::path& factive, const std::filesystem::path& neg_raising) {
  return {read_word_list(factive), read_word_list(neg_raising)};
}

ScatterTable scatter_export(const std::vector<EventRecord>& items, const PredictionSet& preds,
                            const std::vector<oracle::Feature>& facet, const VerbClasses& classes) {
  if (facet.empty()) throw Error("scatter export needs at least one facet feature");
  ScatterTable table;
  for (auto f : facet) {
    if (!table.facet_name.empty()) table.facet_name += "+";
    table.facet_name += oracle::to_string(f);
  }
  require_predictions(all_of(items), preds);
  for (const auto& item : items) {
    ScatterRow row;
    row.id = item.id;
    row.gold = item.gold.value();
    row.prediction = preds.entries.at(item.id).value();
    row.facet = facet_value(item, facet);
    if (item.verb) {
      row.factive = classes.factive.count(*item.verb) > 0;
      row.neg_raising = classes.neg_raising.count(*item.verb) > 0;
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string to_csv(const ScatterTable& table) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "# reference=y=x; axis_min=-3; axis_max=3; facet=" << table.facet_name << '\n';
  out << "id,gold,prediction,facet,factive,neg_raising\n";
  for (const auto& r : table.rows) {
    out << csv_field(r.id) << ',' << r.gold << ',' << r.prediction << ',' << csv_field(r.facet) << ','
        << (r.factive ? 1 : 0) << ',' << (r.neg_raising ? 1 : 0) << '\n';
  }
  return out.str();
}

std::string_view to_string(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::PriorProbability: return "PriorProbability";
    case ErrorCategory::ContextSuggests: return "ContextSuggests";
    case ErrorCategory::QUD: return "QUD";
    case ErrorCategory::TenseAspect: return "TenseAspect";
    case ErrorCategory::SubjectAuthority: return "SubjectAuthority";
    case ErrorCategory::SubjectComplementInteraction: return "SubjectComplementInteraction";
    case ErrorCategory::LexicalInference: return "LexicalInference";
    case ErrorCategory::AnnotationError: return "AnnotationError";
  }
  return "?";
}

ErrorCategory parse_error_category(std::string_view text) {
  std::string key;
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c))) key += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  static const std::vector<std::pair<std::string, ErrorCategory>> kNames = {
      {"priorprobability", ErrorCategory::PriorProbability},
      {"priorprobabilityoftheevent", ErrorCategory::PriorProbability},
      {"contextsuggests", ErrorCategory::ContextSuggests},
      {"contextsuggestsnonfactuality", ErrorCategory::ContextSuggests},
      {"qud", ErrorCategory::QUD},
      {"questionunderdiscussion", ErrorCategory::QUD},
      {"questionunderdiscussionqud", ErrorCategory::QUD},
      {"tenseaspect", ErrorCategory::TenseAspect},
      {"subjectauthority", ErrorCategory::SubjectAuthority},
      {"subjectauthoritycredibility", ErrorCategory::SubjectAuthority},
      {"subjectcomplementinteraction", ErrorCategory::SubjectComplementInteraction},
      {"lexicalinference", ErrorCategory::LexicalInference},
      {"annotationerror", ErrorCategory::AnnotationError},
  };
  for (const auto& [name, cat] : kNames) {
    if (key == name) return cat;
  }
  throw Error("unknown error category '" + std::string(text) + "'");
}

std::vector<CategoryAnnotation> parse_category_annotations(std::string_view text, const std::string& source) {
  std::vector<CategoryAnnotation> out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    const auto t = io::trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto ctx = source + ":" + std::to_string(n);
    const auto cols = io::split_any(t, "\t");
    if (cols.size() != 3) throw Error(ctx + ": expected 'id<TAB>category<TAB>annotator'");
    try {
      out.push_back({cols[0], parse_error_category(cols[1]), cols[2]});
    } catch (const Error& e) {
      throw Error(ctx + ": " + e.what());
    }
  }
  return out;
}

std::vector<CategoryAnnotation> read_category_annotations(const std::filesystem::path& path) {
  return parse_category_annotations(io::read_file(path), path.string());
}

CategoryReport error_category_report(const std::vector<RankedError>& ranked,
                                     const std::vector<CategoryAnnotation>& annotations) {
  CategoryReport report;
  std::unordered_map<std::string, Dataset> ranked_ids;
  for (const auto& r : ranked) ranked_ids.emplace(r.id, r.dataset);

  // id -> labels in file order, one per annotator
  std::map<std::string, std::vector<std::pair<std::string, ErrorCategory>>> labels;
  for (const auto& a : annotations) {
    if (!ranked_ids.count(a.id)) {
      report.warnings.push_back(a.id + ": annotated but not among the ranked errors");
      continue;
    }
    auto& v = labels[a.id];
    const bool dup = std::any_of(v.begin(), v.end(), [&](const auto& p) { return p.first == a.annotator; });
    if (dup) {
      report.warnings.push_back(a.id + ": annotator " + a.annotator + " labeled it twice; first label kept");
      continue;
    }
    v.emplace_back(a.annotator, a.category);
  }

  std::map<Dataset, CategoryCounts> per;
  for (const auto& [id, v] : labels) {
    auto& c = per[ranked_ids.at(id)];
    c.dataset = ranked_ids.at(id);
    ++c.counts[static_cast<std::size_t>(v.front().second)];
    ++c.total;
    if (v.size() >= 2) {
      ++report.shared;
      const bool same = std::all_of(v.begin(), v.end(), [&](const auto& p) { return p.second == v.front().second; });
      if (same) ++report.agreed;
    }
  }
  for (auto& [_, c] : per) {
    for (std::size_t k = 0; k < kErrorCategoryCount; ++k) {
      c.percent[k] = 100.0 * static_cast<double>(c.counts[k]) / static_cast<double>(c.total);
    }
    report.per_dataset.push_back(c);
  }
  if (report.shared > 0) {
    report.agreement_percent = 100.0 * static_cast<double>(report.agreed) / static_cast<double>(report.shared);
  }
  return report;
}

json to_json(const std::vector<DatasetMetrics>& metrics) {
  json out = json::array();
  for (const auto& m : metrics) {
    out.push_back({{"dataset", to_string(m.dataset)},
                   {"n", m.n},
                   {"mae", m.mae},
                   {"pearson", m.pearson ? json(*m.pearson) : json(nullptr)}});
  }
  return out;
}

json to_json(const Dispersion& d) {
  return json{{"mean_prediction_variance", d.mean_prediction_variance},
              {"mean_gold_variance", d.mean_gold_variance},
              {"groups", d.groups},
              {"items", d.items}};
}

json to_json(const CategoryReport& r) {
  json datasets = json::array();
  for (const auto& c : r.per_dataset) {
    json cats = json::object();
    for (std::size_t k = 0; k < kErrorCategoryCount; ++k) {
      cats[std::string(to_string(static_cast<ErrorCategory>(k)))] = {{"count", c.counts[k]},
                                                                     {"percent", c.percent[k]}};
    }
    datasets.push_back({{"dataset", to_string(c.dataset)}, {"total", c.total}, {"categories", cats}});
  }
  return json{{"datasets", datasets},
              {"shared", r.shared},
              {"agreed", r.agreed},
              {"agreement_percent", r.agreement_percent ? json(*r.agreement_percent) : json(nullptr)},
              {"warnings", r.warnings}};
}

json to_json(const StudyResult& r) {
  return json{{"rows", r.rows.size()},
              {"excluded_udsih2", r.excluded_udsih2},
              {"all_slopes_positive", r.all_slopes_positive},
              {"model", stats::to_json(r.model)}};
}

namespace {

std::string fixed(double v, int precision = 3) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(precision) << v;
  return s.str();
}

}  // namespace

std::string format_table(const std::vector<DatasetMetrics>& metrics) {
  std::ostringstream out;
  out << std::left << std::setw(12) << "dataset" << std::right << std::setw(8) << "n" << std::setw(10) << "MAE"
      << std::setw(10) << "r" << '\n';
  for (const auto& m : metrics) {
    out << std::left << std::setw(12) << to_string(m.dataset) << std::right << std::setw(8) << m.n
        << std::setw(10) << fixed(m.mae) << std::setw(10) << (m.pearson ? fixed(*m.pearson) : "undef") << '\n';
  }
  return out.str();
}

std::string format_table(const CategoryReport& r) {
  std::ostringstream out;
  out << std::left << std::setw(30) << "category";
  for (const auto& c : r.per_dataset) out << std::right << std::setw(8) << to_string(c.dataset) << std::setw(8) << "%";
  out << '\n';
  for (std::size_t k = 0; k < kErrorCategoryCount; ++k) {
    out << std::left << std::setw(30) << to_string(static_cast<ErrorCategory>(k));
    for (const auto& c : r.per_dataset) {
      out << std::right << std::setw(8) << c.counts[k] << std::setw(8) << fixed(c.percent[k], 1);
    }
    out << '\n';
  }
  out << std::left << std::setw(30) << "total";
  for (const auto& c : r.per_dataset) out << std::right << std::setw(8) << c.total << std::setw(8) << "";
  out << '\n';
  if (r.agreement_percent) {
    out << "agreement: " << r.agreed << "/" << r.shared << " = " << fixed(*r.agreement_percent, 1) << "%\n";
  }
  return out.str();
}

std::string format_table(const StudyResult& r) {
  std::ostringstream out;
  out << "fixed intercept " << fixed(r.model.fixed_intercept) << " (SE " << fixed(r.model.fixed_se[0])
      << "), fixed slope " << fixed(r.model.fixed_slope) << " (SE " << fixed(r.model.fixed_se[1]) << ")\n";
  out << std::left << std::setw(12) << "dataset" << std::right << std::setw(8) << "n" << std::setw(10) << "alpha"
      << std::setw(10) << "beta" << '\n';
  for (const auto& g : r.model.groups) {
    out << std::left << std::setw(12) << g.group << std::right << std::setw(8) << g.n << std::setw(10)
        << fixed(g.intercept_deviation) << std::setw(10) << fixed(g.slope) << '\n';
  }
  out << "all slopes positive: " << (r.all_slopes_positive ? "yes" : "no") << '\n';
  return out.str();
}

}  // namespace factuality::analysis
