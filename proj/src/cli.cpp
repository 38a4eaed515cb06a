#include "factuality/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "factuality/analysis.hpp"
#include "factuality/conllu.hpp"
#include "factuality/core.hpp"
#include "factuality/harmonizer.hpp"
#include "factuality/io.hpp"
#include "factuality/oracle.hpp"
#include "factuality/signature.hpp"
#include "factuality/stats.hpp"

namespace factuality::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "1.0.0";

/// Everything a subcommand produced: files to write and warnings to report.
struct Outcome {
  std::vector<std::pair<fs::path, std::string>> files;
  std::vector<std::string> warnings;
  std::string summary;
};

struct Command {
  std::string name;
  std::function<std::vector<fs::path>()> inputs;
  std::function<fs::path()> out;
  std::function<Outcome()> body;
};

void write_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot write " + tmp.string());
    f << content;
    if (!f.flush()) throw Error("cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

fs::path sidecar(const fs::path& out, const std::string& suffix) {
  fs::path p = out;
  p += suffix;
  return p;
}

std::optional<Split> parse_split_filter(const std::string& text) {
  if (text == "all") return std::nullopt;
  return parse_split(text);
}

std::vector<EventRecord> select(std::vector<EventRecord> items, std::optional<Split> split,
                                const std::string& dataset) {
  std::optional<Dataset> ds;
  if (!dataset.empty()) ds = parse_dataset(dataset);
  std::erase_if(items, [&](const EventRecord& r) {
    return (split && r.split != *split) || (ds && r.dataset != *ds);
  });
  if (items.empty()) throw Error("no items match the requested split/dataset");
  return items;
}

oracle::Feature parse_feature(const std::string& text) {
  const auto t = io::to_lower(io::trim(text));
  if (t == "verb") return oracle::Feature::Verb;
  if (t == "polarity") return oracle::Feature::Polarity;
  if (t == "frame") return oracle::Feature::Frame;
  if (t == "environment" || t == "env") return oracle::Feature::Environment;
  throw Error("unknown feature '" + text + "'");
}

std::vector<oracle::Feature> parse_features(const std::string& text) {
  std::vector<oracle::Feature> out;
  for (const auto& part : io::split_any(text, ",")) out.push_back(parse_feature(part));
  if (out.empty()) throw Error("empty feature list");
  return out;
}

analysis::PredictionSet load_preds(const std::vector<std::string>& paths) {
  std::vector<analysis::PredictionSet> runs;
  for (const auto& p : paths) runs.push_back(analysis::read_predictions(p));
  return analysis::average(runs);
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

std::string fmt(double v, int precision = 3) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(precision) << v;
  return s.str();
}

// --- subcommands -----------------------------------------------------------

struct IngestArgs {
  std::string dataset;
  std::vector<std::string> input;
  std::string parses;
  std::string exclusions;
  std::string out;
};

Outcome ingest(const IngestArgs& a) {
  const Dataset d = parse_dataset(a.dataset);
  if (!a.parses.empty() && d != Dataset::CB && d != Dataset::RP) {
    throw Error("--parses applies only to cb and rp");
  }
  if (!a.exclusions.empty() && d != Dataset::RP) throw Error("--exclusions applies only to rp");
  if (a.input.size() > 1 && (d == Dataset::CB || d == Dataset::RP)) {
    throw Error(std::string(to_string(d)) + " takes a single --input table");
  }

  harmonizer::LoadResult loaded;
  for (const auto& in : a.input) {
    switch (d) {
      case Dataset::MV: {
        auto r = harmonizer::load_megaveridicality(in);
        loaded.records.insert(loaded.records.end(), r.begin(), r.end());
        break;
      }
      case Dataset::CB: loaded = harmonizer::load_cb(in); break;
      case Dataset::RP: {
        harmonizer::RpOptions opts;
        if (!a.exclusions.empty()) opts.multi_span_ids = harmonizer::read_id_list(a.exclusions);
        loaded = harmonizer::load_rp(in, opts);
        break;
      }
      default: {
        auto r = harmonizer::load_unified(in, d);
        loaded.records.insert(loaded.records.end(), r.begin(), r.end());
      }
    }
  }
  std::set<std::string> seen;
  for (const auto& r : loaded.records) {
    if (!seen.insert(r.id).second) throw Error("duplicate record id " + r.id + " across inputs");
  }
  if (!a.parses.empty()) loaded.records = harmonizer::resolve_spans(loaded.records, conllu::read(a.parses));

  Outcome o;
  json filters = json::array();
  std::ostringstream summary;
  summary << loaded.records.size() << " records\n";
  for (const auto& f : loaded.filters) {
    filters.push_back(harmonizer::to_json(f));
    summary << f.rule << ": kept " << f.kept << ", removed " << f.removed << '\n';
    o.warnings.insert(o.warnings.end(), f.warnings.begin(), f.warnings.end());
  }
  o.files.emplace_back(a.out, io::to_jsonl(loaded.records));
  o.files.emplace_back(sidecar(a.out, ".filters.json"), dump(filters));
  o.summary = summary.str();
  return o;
}

struct SplitArgs {
  std::string in;
  std::string ratios = "0.44,0.12,0.44";
  std::uint64_t seed = 0;
  std::string stratify = "verb";
  std::string out;
};

Outcome split(const SplitArgs& a) {
  harmonizer::SplitSpec spec;
  const auto parts = io::split_any(a.ratios, ",");
  if (parts.size() != 3) throw Error("--ratios needs three comma-separated values");
  for (std::size_t k = 0; k < 3; ++k) spec.ratios[k] = io::parse_double(parts[k], "--ratios");
  spec.seed = a.seed;
  if (a.stratify == "verb") {
    spec.stratify = harmonizer::StratifyKey::Verb;
  } else if (a.stratify == "none") {
    spec.stratify = harmonizer::StratifyKey::None;
  } else {
    throw Error("--stratify must be 'verb' or 'none'");
  }
  spec.validate();
  const auto items = harmonizer::stratified_split(io::read_jsonl(a.in), spec);
  std::array<std::size_t, 3> sizes{};
  for (const auto& r : items) {
    if (r.split != Split::Unassigned) ++sizes[static_cast<std::size_t>(r.split)];
  }
  Outcome o;
  o.files.emplace_back(a.out, io::to_jsonl(items));
  o.summary = "train " + std::to_string(sizes[0]) + ", dev " + std::to_string(sizes[1]) + ", test " +
              std::to_string(sizes[2]) + "\n";
  return o;
}

struct SigArgs {
  std::string in;
  std::string lexicon;
  std::string policy = "uniform";
  std::string split = "all";
  std::string out;
};

Outcome sig_predict(const SigArgs& a) {
  const auto items = select(io::read_jsonl(a.in), parse_split_filter(a.split), "");
  const auto lex = signature::load_lexicon(a.lexicon);
  const auto policy = signature::parse_policy(a.policy);
  const auto preds = signature::predict_all(items, lex, policy);

  std::ostringstream tsv;
  tsv << std::setprecision(17);
  std::vector<double> gold;
  std::vector<Category> cats;
  std::array<std::size_t, 3> counts{};
  json missing = json::array();
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (!preds[i]) {
      missing.push_back(items[i].id);
      continue;
    }
    tsv << items[i].id << '\t' << preds[i]->score.value() << '\n';
    gold.push_back(items[i].gold.value());
    cats.push_back(preds[i]->category);
    ++counts[static_cast<std::size_t>(preds[i]->category)];
  }

  Outcome o;
  json summary{{"items", items.size()},
               {"covered", cats.size()},
               {"no_signature", missing},
               {"policy", signature::to_string(policy)},
               {"category_counts", {{"-", counts[0]}, {"o", counts[1]}, {"+", counts[2]}}}};
  std::ostringstream text;
  text << cats.size() << "/" << items.size() << " items have a signature\n";

  // Alignment of signature labels with gold: proportional-odds fit of the
  // predicted category on the gold score, against the intercept-only model.
  json fit = nullptr;
  try {
    const auto m = stats::fit_ordered_logistic(gold, cats);
    double baseline = 0.0;
    for (auto c : counts) {
      if (c) baseline += static_cast<double>(c) * std::log(static_cast<double>(c) / static_cast<double>(cats.size()));
    }
    fit = stats::to_json(m);
    fit["baseline_loglik"] = baseline;
    fit["lr_statistic"] = 2.0 * (m.loglik - baseline);
    text << "ordered logit: beta " << fmt(m.beta) << " (SE " << fmt(m.std_errors[0]) << "), LR "
         << fmt(2.0 * (m.loglik - baseline), 2) << (m.converged ? "" : " [not converged]") << '\n';
    if (!m.converged) o.warnings.push_back("ordered logit did not converge");
  } catch (const Error& e) {
    o.warnings.push_back(std::string("ordered logit skipped: ") + e.what());
  }
  summary["ordered_logit"] = fit;

  o.files.emplace_back(a.out, tsv.str());
  o.files.emplace_back(sidecar(a.out, ".summary.json"), dump(summary));
  o.summary = text.str();
  return o;
}

struct OracleArgs {
  std::string in;
  std::string schema = "auto";
  std::string split = "test";
  std::string rule_preds;
  std::string out;
};

Outcome run_oracle(const OracleArgs& a) {
  const auto all = io::read_jsonl(a.in);
  const auto target_split = parse_split_filter(a.split);
  Outcome o;

  std::optional<oracle::RulePredictions> rules;
  if (!a.rule_preds.empty()) {
    rules = oracle::ingest_rule_predictions(a.rule_preds, all);
    o.warnings.insert(o.warnings.end(), rules->warnings.begin(), rules->warnings.end());
  }

  std::map<Dataset, std::vector<EventRecord>> train, targets;
  for (const auto& r : all) {
    if (r.split == Split::Train) train[r.dataset].push_back(r);
    if (!target_split || r.split == *target_split) targets[r.dataset].push_back(r);
  }

  std::ostringstream jsonl, text;
  for (const auto& [d, items] : targets) {
    std::size_t answered = 0, unmatched = 0;
    if (is_embedded_event_dataset(d)) {
      if (!train.count(d)) {
        o.warnings.push_back(std::string(to_string(d)) + ": no training items; skipped");
        continue;
      }
      const auto schema = a.schema == "auto" ? oracle::FeatureSchema::for_dataset(d)
                                             : oracle::FeatureSchema::parse(a.schema);
      const auto index = oracle::build_index(train.at(d), schema);
      const auto answers = oracle::expected_inference_all(items, index);
      for (std::size_t i = 0; i < items.size(); ++i) {
        if (answers[i]) {
          jsonl << oracle::to_json(items[i].id, *answers[i]).dump() << '\n';
          ++answered;
        } else {
          ++unmatched;
        }
      }
    } else {
      if (d == Dataset::UDSIH2) continue;
      for (const auto& item : items) {
        const auto hit = rules ? rules->scores.find(item.id) : decltype(rules->scores.end()){};
        if (rules && hit != rules->scores.end()) {
          jsonl << json{{"id", item.id}, {"score", hit->second.value()}, {"source", "rule"}}.dump() << '\n';
          ++answered;
        } else {
          ++unmatched;
        }
      }
    }
    text << to_string(d) << ": " << answered << " answered, " << unmatched << " without expected inference\n";
    if (unmatched) {
      o.warnings.push_back(std::string(to_string(d)) + ": " + std::to_string(unmatched) +
                           " items without expected inference");
    }
  }
  o.files.emplace_back(a.out, jsonl.str());
  o.summary = text.str();
  return o;
}

struct EvalArgs {
  std::string in;
  std::vector<std::string> preds;
  std::string split = "test";
  std::string out;
};

Outcome eval(const EvalArgs& a) {
  std::vector<analysis::PredictionSet> runs;
  for (const auto& p : a.preds) runs.push_back(analysis::read_predictions(p));
  analysis::EvaluateOptions opts;
  opts.split = parse_split_filter(a.split);
  const auto metrics = analysis::evaluate(io::read_jsonl(a.in), runs, opts);
  Outcome o;
  for (const auto& m : metrics) {
    if (!m.pearson) o.warnings.push_back(std::string(to_string(m.dataset)) + ": Pearson r undefined");
  }
  json report{{"runs", a.preds.size()}, {"metrics", analysis::to_json(metrics)}};
  o.files.emplace_back(a.out, dump(report));
  o.summary = analysis::format_table(metrics);
  return o;
}

struct ExpectedArgs {
  std::string in;
  std::vector<std::string> preds;
  std::string oracle;
  std::string split = "test";
  bool zero_covariance = false;
  std::string out;
};

Outcome analyze_expected(const ExpectedArgs& a) {
  const auto items = select(io::read_jsonl(a.in), parse_split_filter(a.split), "");
  stats::MixedFitOptions opts;
  opts.zero_covariance = a.zero_covariance;
  const auto result =
      analysis::expected_inference_study(items, load_preds(a.preds), oracle::read_expected_jsonl(a.oracle), opts);
  Outcome o;
  o.warnings = result.model.warnings;
  if (!result.model.converged) o.warnings.push_back("mixed model did not converge");
  o.files.emplace_back(a.out, dump(analysis::to_json(result)));
  o.summary = analysis::format_table(result);
  return o;
}

struct ErrorsArgs {
  std::string in;
  std::vector<std::string> preds;
  double top_frac = 0.10;
  std::string dataset;
  std::string split = "all";
  std::string out;
};

Outcome analyze_errors(const ErrorsArgs& a) {
  const auto items = select(io::read_jsonl(a.in), parse_split_filter(a.split), a.dataset);
  const auto preds = load_preds(a.preds);
  std::map<Dataset, std::vector<EventRecord>> by_dataset;
  for (const auto& r : items) by_dataset[r.dataset].push_back(r);
  std::vector<analysis::RankedError> ranked;
  std::ostringstream text;
  for (const auto& [d, group] : by_dataset) {
    const auto top = analysis::rank_errors(group, preds, a.top_frac);
    double sum = 0.0;
    for (const auto& r : top) sum += r.abs_error;
    text << to_string(d) << ": " << top.size() << " of " << group.size() << " items, abs error "
         << fmt(top.back().abs_error, 2) << "-" << fmt(top.front().abs_error, 2) << ", mean "
         << fmt(sum / static_cast<double>(top.size()), 2) << '\n';
    ranked.insert(ranked.end(), top.begin(), top.end());
  }
  Outcome o;
  o.files.emplace_back(a.out, analysis::to_tsv(ranked));
  o.summary = text.str();
  return o;
}

struct DispersionArgs {
  std::string in;
  std::vector<std::string> preds;
  std::string keys = "verb,frame,polarity";
  std::string variance = "sample";
  std::string dataset;
  std::string split = "all";
  std::string out;
};

Outcome analyze_dispersion(const DispersionArgs& a) {
  analysis::VarianceConvention conv;
  if (a.variance == "sample") {
    conv = analysis::VarianceConvention::Sample;
  } else if (a.variance == "population") {
    conv = analysis::VarianceConvention::Population;
  } else {
    throw Error("--variance must be 'sample' or 'population'");
  }
  const auto items = select(io::read_jsonl(a.in), parse_split_filter(a.split), a.dataset);
  const auto d = analysis::group_dispersion(items, load_preds(a.preds), parse_features(a.keys), conv);
  json report = analysis::to_json(d);
  report["keys"] = a.keys;
  report["variance"] = a.variance;
  Outcome o;
  o.files.emplace_back(a.out, dump(report));
  o.summary = "mean prediction variance " + fmt(d.mean_prediction_variance, 2) + ", mean gold variance " +
              fmt(d.mean_gold_variance, 2) + " over " + std::to_string(d.groups) + " groups\n";
  return o;
}

struct ScatterArgs {
  std::string in;
  std::vector<std::string> preds;
  std::string facet = "environment";
  std::string factive;
  std::string neg_raising;
  std::string dataset;
  std::string split = "all";
  std::string out;
};

Outcome analyze_scatter(const ScatterArgs& a) {
  const auto items = select(io::read_jsonl(a.in), parse_split_filter(a.split), a.dataset);
  analysis::VerbClasses classes;
  if (!a.factive.empty() || !a.neg_raising.empty()) {
    if (a.factive.empty() || a.neg_raising.empty()) throw Error("--factive and --neg-raising go together");
    classes = analysis::read_verb_classes(a.factive, a.neg_raising);
  }
  const auto table = analysis::scatter_export(items, load_preds(a.preds), parse_features(a.facet), classes);
  Outcome o;
  o.files.emplace_back(a.out, analysis::to_csv(table));
  o.summary = std::to_string(table.rows.size()) + " rows\n";
  return o;
}

struct CategoriesArgs {
  std::string ranked;
  std::string annotations;
  std::string out;
};

Outcome analyze_categories(const CategoriesArgs& a) {
  const auto report = analysis::error_category_report(analysis::read_ranked(a.ranked),
                                                      analysis::read_category_annotations(a.annotations));
  Outcome o;
  o.warnings = report.warnings;
  o.files.emplace_back(a.out, dump(analysis::to_json(report)));
  o.summary = analysis::format_table(report);
  return o;
}

// --- plumbing --------------------------------------------------------------

json digest_inputs(const std::vector<fs::path>& inputs) {
  json out = json::array();
  for (const auto& p : inputs) {
    out.push_back({{"path", p.generic_string()}, {"fnv1a64", io::fnv1a64_hex(io::read_file(p))}});
  }
  return out;
}

int execute(const Command& cmd, const std::string& config_text, std::ostream& out, std::ostream& err) {
  const fs::path target = cmd.out();
  const fs::path failed = sidecar(target, ".failed");
  try {
    Outcome o = cmd.body();
    json outputs = json::array();
    for (const auto& [path, content] : o.files) {
      outputs.push_back({{"path", path.generic_string()}, {"fnv1a64", io::fnv1a64_hex(content)}});
    }
    const int code = o.warnings.empty() ? kExitOk : kExitWarnings;
    const json manifest{{"tool", "factuality"},
                        {"version", kVersion},
                        {"command", cmd.name},
                        {"config_hash", io::fnv1a64_hex(config_text)},
                        {"config", config_text},
                        {"inputs", digest_inputs(cmd.inputs())},
                        {"outputs", outputs},
                        {"warnings", o.warnings},
                        {"exit_code", code}};
    o.files.emplace_back(sidecar(target, ".manifest.json"), dump(manifest));
    for (const auto& [path, content] : o.files) write_atomic(path, content);
    std::error_code ec;
    fs::remove(failed, ec);
    out << o.summary;
    for (const auto& w : o.warnings) err << "warning: " << w << '\n';
    return code;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    try {
      write_atomic(failed, std::string(cmd.name) + ": " + e.what() + "\n");
    } catch (const std::exception&) {
      // The output location itself is unusable; the message above is all we can do.
    }
    return kExitFailure;
  }
}

std::vector<fs::path> paths(std::initializer_list<const std::string*> single,
                            std::initializer_list<const std::vector<std::string>*> multi = {}) {
  std::vector<fs::path> out;
  for (const auto* s : single) {
    if (!s->empty()) out.emplace_back(*s);
  }
  for (const auto* m : multi) {
    for (const auto& s : *m) out.emplace_back(s);
  }
  return out;
}

CLI::Option* add_split(CLI::App* app, std::string& split) {
  return app->add_option("--split", split, "Items to use: train, dev, test or all")
      ->capture_default_str()
      ->check(CLI::IsMember({"train", "dev", "test", "all"}));
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Event-factuality corpus harmonization, inference baselines and error analysis", "factuality"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  app.set_config("--config", "", "Key-value config file ([section] headers name subcommands)")
      ->envname(kConfigEnv);

  std::vector<Command> commands;
  auto add = [&](CLI::App* sub, std::string name, auto inputs, auto outpath, auto body) {
    sub->configurable();
    commands.push_back({std::move(name), inputs, outpath, body});
    sub->callback([] {});
  };
  const auto existing = CLI::ExistingFile;

  IngestArgs ingest_args;
  auto* c_ingest = app.add_subcommand("ingest", "Load a corpus into unified JSON Lines");
  c_ingest->add_option("--dataset", ingest_args.dataset, "mv, cb, rp, factbank, meantime, uw or uds-ih2")->required();
  c_ingest->add_option("--input", ingest_args.input, "Corpus file (repeatable for split files)")
      ->required()
      ->check(existing);
  c_ingest->add_option("--parses", ingest_args.parses, "CoNLL-U parses for span resolution")->check(existing);
  c_ingest->add_option("--exclusions", ingest_args.exclusions, "RP ids without a single-span event")
      ->check(existing);
  c_ingest->add_option("--out", ingest_args.out, "Output JSON Lines")->required();
  add(c_ingest, "ingest",
      [&] { return paths({&ingest_args.parses, &ingest_args.exclusions}, {&ingest_args.input}); },
      [&] { return fs::path(ingest_args.out); }, [&] { return ingest(ingest_args); });

  SplitArgs split_args;
  auto* c_split = app.add_subcommand("split", "Assign seeded, verb-stratified train/dev/test splits");
  c_split->add_option("--in", split_args.in, "Unified JSON Lines")->required()->check(existing);
  c_split->add_option("--ratios", split_args.ratios, "train,dev,test proportions")->capture_default_str();
  c_split->add_option("--seed", split_args.seed, "Random seed")->capture_default_str();
  c_split->add_option("--stratify", split_args.stratify, "verb or none")->capture_default_str();
  c_split->add_option("--out", split_args.out, "Output JSON Lines")->required();
  add(c_split, "split", [&] { return paths({&split_args.in}); }, [&] { return fs::path(split_args.out); },
      [&] { return split(split_args); });

  SigArgs sig_args;
  auto* c_sig = app.add_subcommand("sig-predict", "Signature-based predictions from a lexicon");
  c_sig->add_option("--in", sig_args.in, "Unified JSON Lines")->required()->check(existing);
  c_sig->add_option("--lexicon", sig_args.lexicon, "Signature lexicon TSV")->required()->check(existing);
  c_sig->add_option("--policy", sig_args.policy, "uniform or negation-only")->capture_default_str();
  add_split(c_sig, sig_args.split);
  c_sig->add_option("--out", sig_args.out, "Prediction TSV")->required();
  add(c_sig, "sig-predict", [&] { return paths({&sig_args.in, &sig_args.lexicon}); },
      [&] { return fs::path(sig_args.out); }, [&] { return sig_predict(sig_args); });

  OracleArgs oracle_args;
  auto* c_oracle = app.add_subcommand("oracle", "Expected inference from training-set feature means");
  c_oracle->add_option("--in", oracle_args.in, "Unified JSON Lines with splits")->required()->check(existing);
  c_oracle->add_option("--schema", oracle_args.schema, "auto, mv, rp, embedded or cb")->capture_default_str();
  add_split(c_oracle, oracle_args.split);
  c_oracle->add_option("--rule-preds", oracle_args.rule_preds, "Rule-based predictions for other corpora")
      ->check(existing);
  c_oracle->add_option("--out", oracle_args.out, "Output JSON Lines")->required();
  add(c_oracle, "oracle", [&] { return paths({&oracle_args.in, &oracle_args.rule_preds}); },
      [&] { return fs::path(oracle_args.out); }, [&] { return run_oracle(oracle_args); });

  EvalArgs eval_args;
  auto* c_eval = app.add_subcommand("eval", "MAE and Pearson r per dataset over the mean of runs");
  c_eval->add_option("--in", eval_args.in, "Unified JSON Lines")->required()->check(existing);
  c_eval->add_option("--preds", eval_args.preds, "Prediction TSVs")->required()->check(existing);
  add_split(c_eval, eval_args.split);
  c_eval->add_option("--out", eval_args.out, "Report JSON")->required();
  add(c_eval, "eval", [&] { return paths({&eval_args.in}, {&eval_args.preds}); },
      [&] { return fs::path(eval_args.out); }, [&] { return eval(eval_args); });

  auto* c_analyze = app.add_subcommand("analyze", "Error analyses over model predictions");
  c_analyze->require_subcommand(1);
  c_analyze->configurable();

  ExpectedArgs exp_args;
  auto* c_exp = c_analyze->add_subcommand("expected", "Mixed model of model error on expected-inference error");
  c_exp->add_option("--in", exp_args.in, "Unified JSON Lines")->required()->check(existing);
  c_exp->add_option("--preds", exp_args.preds, "Prediction TSVs")->required()->check(existing);
  c_exp->add_option("--oracle", exp_args.oracle, "Output of the oracle subcommand")->required()->check(existing);
  add_split(c_exp, exp_args.split);
  c_exp->add_flag("--zero-covariance", exp_args.zero_covariance, "Fit without random effects");
  c_exp->add_option("--out", exp_args.out, "Report JSON")->required();
  add(c_exp, "analyze expected", [&] { return paths({&exp_args.in, &exp_args.oracle}, {&exp_args.preds}); },
      [&] { return fs::path(exp_args.out); }, [&] { return analyze_expected(exp_args); });

  ErrorsArgs err_args;
  auto* c_err = c_analyze->add_subcommand("errors", "Rank the largest absolute errors per dataset");
  c_err->add_option("--in", err_args.in, "Unified JSON Lines")->required()->check(existing);
  c_err->add_option("--preds", err_args.preds, "Prediction TSVs")->required()->check(existing);
  c_err->add_option("--top-frac", err_args.top_frac, "Fraction of items to keep")->capture_default_str();
  c_err->add_option("--dataset", err_args.dataset, "Restrict to one dataset");
  add_split(c_err, err_args.split);
  c_err->add_option("--out", err_args.out, "Ranked TSV")->required();
  add(c_err, "analyze errors", [&] { return paths({&err_args.in}, {&err_args.preds}); },
      [&] { return fs::path(err_args.out); }, [&] { return analyze_errors(err_args); });

  DispersionArgs disp_args;
  auto* c_disp = c_analyze->add_subcommand("dispersion", "Within-group variance of predictions and golds");
  c_disp->add_option("--in", disp_args.in, "Unified JSON Lines")->required()->check(existing);
  c_disp->add_option("--preds", disp_args.preds, "Prediction TSVs")->required()->check(existing);
  c_disp->add_option("--keys", disp_args.keys, "Grouping features")->capture_default_str();
  c_disp->add_option("--variance", disp_args.variance, "sample or population")->capture_default_str();
  c_disp->add_option("--dataset", disp_args.dataset, "Restrict to one dataset");
  add_split(c_disp, disp_args.split);
  c_disp->add_option("--out", disp_args.out, "Report JSON")->required();
  add(c_disp, "analyze dispersion", [&] { return paths({&disp_args.in}, {&disp_args.preds}); },
      [&] { return fs::path(disp_args.out); }, [&] { return analyze_dispersion(disp_args); });

  ScatterArgs sc_args;
  auto* c_sc = c_analyze->add_subcommand("scatter", "Gold-vs-prediction table for plotting");
  c_sc->add_option("--in", sc_args.in, "Unified JSON Lines")->required()->check(existing);
  c_sc->add_option("--preds", sc_args.preds, "Prediction TSVs")->required()->check(existing);
  c_sc->add_option("--facet", sc_args.facet, "Facet features")->capture_default_str();
  c_sc->add_option("--factive", sc_args.factive, "Factive verb list")->check(existing);
  c_sc->add_option("--neg-raising", sc_args.neg_raising, "Neg-raising verb list")->check(existing);
  c_sc->add_option("--dataset", sc_args.dataset, "Restrict to one dataset");
  add_split(c_sc, sc_args.split);
  c_sc->add_option("--out", sc_args.out, "Output CSV")->required();
  add(c_sc, "analyze scatter",
      [&] { return paths({&sc_args.in, &sc_args.factive, &sc_args.neg_raising}, {&sc_args.preds}); },
      [&] { return fs::path(sc_args.out); }, [&] { return analyze_scatter(sc_args); });

  CategoriesArgs cat_args;
  auto* c_cat = c_analyze->add_subcommand("categories", "Tally human-assigned error categories");
  c_cat->add_option("--ranked", cat_args.ranked, "Output of analyze errors")->required()->check(existing);
  c_cat->add_option("--annotations", cat_args.annotations, "id, category, annotator TSV")
      ->required()
      ->check(existing);
  c_cat->add_option("--out", cat_args.out, "Report JSON")->required();
  add(c_cat, "analyze categories", [&] { return paths({&cat_args.ranked, &cat_args.annotations}); },
      [&] { return fs::path(cat_args.out); }, [&] { return analyze_categories(cat_args); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }

  const CLI::App* leaf = &app;
  std::string name;
  while (!leaf->get_subcommands().empty()) {
    leaf = leaf->get_subcommands().front();
    name += (name.empty() ? "" : " ") + leaf->get_name();
  }
  const auto it = std::find_if(commands.begin(), commands.end(), [&](const Command& c) { return c.name == name; });
  if (it == commands.end()) {
    err << "error: no command " << name << '\n';
    return kExitFailure;
  }
  // The effective configuration (file values, flags and defaults) is what the
  // manifest hash covers; paths of the config file itself are not.
  std::string config_text = app.config_to_str(true, false);
  return execute(*it, config_text, out, err);
}

}  // namespace factuality::cli
