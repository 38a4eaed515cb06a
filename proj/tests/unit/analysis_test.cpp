#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "factuality/analysis.hpp"
#include "support.hpp"

using namespace factuality;
using namespace factuality::analysis;
using testing_support::make_item;

namespace {

PredictionSet preds_of(std::map<std::string, double> m, std::string name = "m") {
  PredictionSet p;
  p.model_name = std::move(name);
  for (auto& [id, v] : m) p.entries.emplace(id, Score(v));
  return p;
}

std::vector<EventRecord> ladder(Dataset d, std::size_t n, const std::string& prefix) {
  std::vector<EventRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(make_item(prefix + std::to_string(i), d, -3.0 + 6.0 * static_cast<double>(i) / (n - 1.0)));
  }
  return out;
}

}  // namespace

TEST_CASE("prediction TSV parsing") {
  const auto p = parse_predictions("# run 1\ncb:a:0\t1.5\ncb:a:1\t-2\n", "p.tsv", "bert");
  CHECK(p.entries.size() == 2);
  CHECK(p.entries.at("cb:a:1").value() == -2.0);
  CHECK_THROWS_AS(parse_predictions("cb:a:0\t1.5\ncb:a:0\t1\n", "p.tsv", "m"), Error);
  CHECK_THROWS_AS(parse_predictions("cb:a:0\t3.5\n", "p.tsv", "m"), Error);
  CHECK_THROWS_AS(parse_predictions("cb:a:0 1.5\n", "p.tsv", "m"), Error);
  CHECK(parse_predictions(to_tsv(p), "q", "m").entries == p.entries);
}

TEST_CASE("evaluate averages runs and is order invariant") {
  const auto items = ladder(Dataset::CB, 6, "cb:t:");
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-3, 3);
  std::vector<PredictionSet> runs;
  for (int r = 0; r < 3; ++r) {
    std::map<std::string, double> m;
    for (const auto& it : items) m[it.id] = u(rng);
    runs.push_back(preds_of(m, "r" + std::to_string(r)));
  }
  const auto a = evaluate(items, runs);
  auto reversed = runs;
  std::reverse(reversed.begin(), reversed.end());
  const auto b = evaluate(items, reversed);
  const auto c = evaluate(items, {average(runs)});
  REQUIRE(a.size() == 1);
  CHECK(a[0].mae == doctest::Approx(b[0].mae).epsilon(1e-14));
  CHECK(a[0].mae == doctest::Approx(c[0].mae).epsilon(1e-14));
  CHECK(*a[0].pearson == doctest::Approx(*c[0].pearson).epsilon(1e-14));

  double direct = 0;
  for (const auto& it : items) {
    const double mean = (runs[0].entries.at(it.id).value() + runs[1].entries.at(it.id).value() +
                         runs[2].entries.at(it.id).value()) / 3.0;
    direct += std::abs(mean - it.gold.value());
  }
  CHECK(a[0].mae == doctest::Approx(direct / 6.0).epsilon(1e-12));
}

TEST_CASE("evaluate filters by split and reports missing ids") {
  auto items = ladder(Dataset::UW, 4, "uw:t:");
  items[0].split = Split::Train;
  const auto p = preds_of({{"uw:t:1", 0}, {"uw:t:2", 1}, {"uw:t:3", 2}});
  const auto m = evaluate(items, {p});
  CHECK(m[0].n == 3);
  EvaluateOptions all;
  all.split.reset();
  try {
    evaluate(items, {p}, all);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("uw:t:0") != std::string::npos);
  }
}

TEST_CASE("top_count and rank_errors ordering") {
  CHECK(top_count(556, 0.10) == 55);
  CHECK(top_count(2504, 0.10) == 250);
  CHECK(top_count(5, 0.1) == 1);
  CHECK(top_count(10, 1.0) == 10);
  CHECK_THROWS_AS(top_count(10, 0.0), Error);
  CHECK_THROWS_AS(top_count(10, 1.01), Error);

  const auto items = ladder(Dataset::CB, 40, "cb:r:");
  std::map<std::string, double> m;
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> u(-6, 6);  // coarse grid to force ties
  for (const auto& it : items) m[it.id] = u(rng) * 0.5;
  const auto p = preds_of(m);
  const auto full = rank_errors(items, p, 1.0);
  REQUIRE(full.size() == 40);
  for (std::size_t i = 1; i < full.size(); ++i) {
    CHECK((full[i - 1].abs_error > full[i].abs_error ||
           (full[i - 1].abs_error == full[i].abs_error && full[i - 1].id < full[i].id)));
  }
  const auto top = rank_errors(items, p, 0.25);
  REQUIRE(top.size() == 10);
  for (std::size_t i = 0; i < 10; ++i) CHECK(top[i].id == full[i].id);
  CHECK(top.back().abs_error >= full[10].abs_error);
}

TEST_CASE("ranked TSV round-trips") {
  const auto items = ladder(Dataset::RP, 5, "rp:r:");
  const auto ranked = rank_errors(items, preds_of({{"rp:r:0", 0}, {"rp:r:1", 0}, {"rp:r:2", 0}, {"rp:r:3", 0},
                                                   {"rp:r:4", 0}}),
                                  1.0);
  testing_support::TempDir dir("ranked");
  const auto back = read_ranked(dir.write("r.tsv", to_tsv(ranked)));
  REQUIRE(back.size() == ranked.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].id == ranked[i].id);
    CHECK(back[i].abs_error == ranked[i].abs_error);
  }
}

TEST_CASE("group dispersion conventions") {
  std::vector<EventRecord> items{make_item("a", Dataset::RP, 0.0, "convince", "V_NP_to_VP"),
                                 make_item("b", Dataset::RP, 3.0, "convince", "V_NP_to_VP"),
                                 make_item("c", Dataset::RP, 1.0, "know", "V_that_S")};
  const std::vector<oracle::Feature> keys{oracle::Feature::Verb, oracle::Feature::Frame,
                                          oracle::Feature::Polarity};
  const auto p = preds_of({{"a", 1.0}, {"b", 2.0}, {"c", -1.0}});
  const auto s = group_dispersion(items, p, keys);
  CHECK(s.groups == 1);
  CHECK(s.items == 2);
  CHECK(s.mean_prediction_variance == doctest::Approx(0.5));
  CHECK(s.mean_gold_variance == doctest::Approx(4.5));
  const auto pop = group_dispersion(items, p, keys, VarianceConvention::Population);
  CHECK(pop.mean_prediction_variance == doctest::Approx(0.25));

  const auto flat = group_dispersion(items, preds_of({{"a", 2.0}, {"b", 2.0}, {"c", 0.0}}), keys);
  CHECK(flat.mean_prediction_variance == 0.0);
  CHECK(flat.mean_gold_variance == s.mean_gold_variance);

  std::vector<EventRecord> singles{items[0], items[2]};
  CHECK_THROWS_AS(group_dispersion(singles, p, keys), Error);
}

TEST_CASE("scatter export carries facet and verb classes") {
  auto items = ladder(Dataset::CB, 3, "cb:s:");
  items[1].verb = "think";
  items[2].environment = Environment::Negation;
  items[2].polarity = Polarity::Negative;
  VerbClasses classes{{"know"}, {"think", "believe"}};
  const auto t = scatter_export(items, preds_of({{"cb:s:0", 0}, {"cb:s:1", 1}, {"cb:s:2", 2}}),
                                {oracle::Feature::Environment}, classes);
  REQUIRE(t.rows.size() == 3);
  CHECK(t.rows[0].factive);
  CHECK(t.rows[1].neg_raising);
  CHECK(t.rows[2].facet == "Negation");
  const auto csv = to_csv(t);
  CHECK(csv.rfind("# reference=y=x", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
}

TEST_CASE("error categories parse loosely and percentages add up") {
  CHECK(parse_error_category("Prior probability of the event") == ErrorCategory::PriorProbability);
  CHECK(parse_error_category("QUD") == ErrorCategory::QUD);
  CHECK(parse_error_category("tense/aspect") == ErrorCategory::TenseAspect);
  CHECK(parse_error_category("Subject-complement interaction") == ErrorCategory::SubjectComplementInteraction);
  CHECK_THROWS_AS(parse_error_category("sarcasm"), Error);

  std::vector<RankedError> ranked;
  for (int i = 0; i < 7; ++i) ranked.push_back({"cb:e:" + std::to_string(i), Dataset::CB, 0, 0, 1});
  for (int i = 0; i < 3; ++i) ranked.push_back({"rp:e:" + std::to_string(i), Dataset::RP, 0, 0, 1});
  const auto ann = parse_category_annotations(
      "cb:e:0\tQUD\tA\ncb:e:0\tQUD\tB\ncb:e:1\tLexical inference\tA\ncb:e:1\tQUD\tB\n"
      "cb:e:2\tAnnotation error\tA\ncb:e:3\tTense/aspect\tA\ncb:e:4\tQUD\tA\ncb:e:5\tQUD\tA\n"
      "cb:e:6\tPrior probability\tA\nrp:e:0\tQUD\tA\nrp:e:1\tQUD\tA\nrp:e:2\tContext suggests\tA\n"
      "cb:e:99\tQUD\tA\n",
      "cats.tsv");
  const auto report = error_category_report(ranked, ann);
  REQUIRE(report.per_dataset.size() == 2);
  for (const auto& c : report.per_dataset) {
    const double total = std::accumulate(c.percent.begin(), c.percent.end(), 0.0);
    CHECK(total == doctest::Approx(100.0).epsilon(1e-3));
  }
  const auto& cb = report.per_dataset[0];
  CHECK(cb.total == 7);
  CHECK(cb.counts[static_cast<std::size_t>(ErrorCategory::QUD)] == 3);
  CHECK(report.shared == 2);
  CHECK(report.agreed == 1);
  CHECK(*report.agreement_percent == doctest::Approx(50.0));
  CHECK(report.warnings.size() == 1);
  CHECK(format_table(report).find("agreement") != std::string::npos);
}

TEST_CASE("expected-inference study: a perfect mimic gives unit slopes") {
  std::vector<EventRecord> items;
  std::map<std::string, double> expected;
  std::map<std::string, double> pred;
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-3, 3);
  for (auto d : {Dataset::MV, Dataset::CB, Dataset::RP, Dataset::UDSIH2}) {
    for (int i = 0; i < 40; ++i) {
      const auto id = std::string(id_prefix(d)) + ":s:" + std::to_string(i);
      items.push_back(make_item(id, d, u(rng)));
      expected[id] = u(rng);
      pred[id] = expected[id];
    }
  }
  const auto r = expected_inference_study(items, preds_of(pred), expected);
  CHECK(r.excluded_udsih2 == 40);
  CHECK(r.rows.size() == 120);
  CHECK(r.all_slopes_positive);
  CHECK(r.model.fixed_slope == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(std::abs(r.model.fixed_intercept) < 1e-6);
  CHECK_THROWS_AS(expected_inference_study(items, preds_of({}), expected), Error);
}
