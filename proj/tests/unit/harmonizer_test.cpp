#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "factuality/harmonizer.hpp"
#include "factuality/io.hpp"
#include "support.hpp"

using namespace factuality;
using namespace factuality::harmonizer;
using testing_support::fixture;
using testing_support::TempDir;

namespace {

/// Rows of a TSV fixture as raw strings, header included.
std::vector<std::vector<std::string>> raw_rows(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, '\t')) cols.push_back(c);
    rows.push_back(cols);
  }
  return rows;
}

std::vector<double> comma_ints(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string c;
  while (std::getline(ss, c, ',')) out.push_back(std::stod(c));
  return out;
}

}  // namespace

TEST_CASE("MegaVeridicality responses map to 3/0/-3 and group per item") {
  const auto items = load_megaveridicality(fixture("mv_small.tsv"));
  REQUIRE(items.size() == 4);
  CHECK(items[0].gold.value() == doctest::Approx((3 + 3 + 0) / 3.0));
  CHECK(items[1].gold.value() == doctest::Approx((-3 - 3 + 3) / 3.0));
  CHECK(items[2].gold.value() == 3.0);
  CHECK(items[0].frame == Frame("V_to_VP_ev"));
  CHECK(items[3].frame == Frame("was_Ved_that_S"));
  CHECK(items[1].polarity == Polarity::Negative);
  CHECK(items[1].environment == Environment::Negation);
  // event is the verb after the infinitival "to"
  CHECK(items[0].tokens[items[0].event_span.start] == "do");
  CHECK(items[0].id == "mv:mv_small:0");
}

TEST_CASE("RP annotations are scaled by exactly 1.5") {
  const auto path = fixture("rp_scale.tsv");
  const auto rows = raw_rows(path);
  const auto result = load_rp(path);
  REQUIRE(rows.size() == 11);
  REQUIRE(result.records.size() == 10);
  for (std::size_t i = 0; i < 10; ++i) {
    const auto& raw = rows[i + 1];
    const std::vector<double> want{1.5 * std::stod(raw[4]), 1.5 * std::stod(raw[5]), 1.5 * std::stod(raw[6])};
    CHECK(result.records[i].annotations == want);
    CHECK(result.records[i].gold.value() == doctest::Approx((want[0] + want[1] + want[2]) / 3.0).epsilon(1e-12));
  }
  CHECK(result.records[0].frame == Frame("V_to_VP"));
  CHECK(result.records[1].frame == Frame("V_that_S"));
}

TEST_CASE("RP sign rule removes only items with both signs") {
  const auto path = fixture("rp_signs.tsv");
  const auto rows = raw_rows(path);
  const auto result = load_rp(path);
  std::vector<std::string> want_removed;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i][5] == "drop") want_removed.push_back("rp:rp_signs:" + std::to_string(i - 1));
  }
  REQUIRE(result.filters.size() == 2);
  CHECK(result.filters[0].rule == "single_span_exclusion");
  CHECK(result.filters[0].removed == 0);
  CHECK(result.filters[1].rule == "sign_disagreement");
  CHECK(result.filters[1].removed_ids == want_removed);
  CHECK(result.filters[1].kept + result.filters[1].removed == rows.size() - 1);
  CHECK(result.records.size() == rows.size() - 1 - want_removed.size());
}

TEST_CASE("RP multi-span exclusions run before the sign rule") {
  RpOptions opts;
  opts.multi_span_ids = {"rp:rp_signs:0", "rp:rp_signs:1"};
  const auto result = load_rp(fixture("rp_signs.tsv"), opts);
  CHECK(result.filters[0].removed == 2);
  CHECK(result.filters[1].kept + result.filters[1].removed == 6);
  CHECK(std::find(result.filters[1].removed_ids.begin(), result.filters[1].removed_ids.end(), "rp:rp_signs:0") ==
        result.filters[1].removed_ids.end());
}

TEST_CASE("RP rejects out-of-range and fractional annotations") {
  TempDir dir("rp");
  const auto head = std::string("sentence\tverb\tframe\tpolarity\tannotations\n");
  CHECK_THROWS_AS(load_rp(dir.write("a.tsv", head + "He managed to go .\tmanage\tto\tpositive\t3,2,2\n")), Error);
  CHECK_THROWS_AS(load_rp(dir.write("b.tsv", head + "He managed to go .\tmanage\tto\tpositive\t1.5,2,2\n")), Error);
  CHECK_THROWS_AS(load_rp(dir.write("c.tsv", "sentence\tverb\tframe\tpolarity\nx\tmanage\tto\tpositive\n")), Error);
}

TEST_CASE("CB 80% agreement rule matches the hand-labeled fixture") {
  const auto path = fixture("cb_agreement.tsv");
  const auto rows = raw_rows(path);
  const auto result = load_cb(path);
  std::vector<std::string> want_removed;
  std::size_t small = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i][4] == "drop") want_removed.push_back("cb:cb_agreement:" + std::to_string(i - 1));
    if (comma_ints(rows[i][3]).size() < 8) ++small;
  }
  REQUIRE(rows.size() == 21);
  REQUIRE(result.filters.size() == 1);
  CHECK(result.filters[0].rule == "agreement_80pct");
  CHECK(result.filters[0].removed_ids == want_removed);
  CHECK(result.filters[0].kept == 20 - want_removed.size());
  CHECK(result.filters[0].warnings.size() == small);
  for (const auto& r : result.records) CHECK(r.frame == Frame("V_that_S"));
}

TEST_CASE("CB long format groups responses by uID") {
  TempDir dir("cb");
  const auto p = dir.write("cb_long.csv",
                           "uID,Answer,Verb,Embedding,Target,Prompt\n"
                           "u1,3,know,negation,\"She didn't know that he left.\",he left\n"
                           "u1,2,know,negation,\"She didn't know that he left.\",he left\n"
                           "u2,0,think,question,\"Did she think that he left?\",he left\n"
                           "u1,3,know,negation,\"She didn't know that he left.\",he left\n"
                           "u2,-3,think,question,\"Did she think that he left?\",he left\n");
  const auto result = load_cb(p);
  REQUIRE(result.filters[0].kept == 1);
  REQUIRE(result.records.size() == 1);
  const auto& r = result.records[0];
  CHECK(r.annotations == std::vector<double>{3, 2, 3});
  CHECK(r.gold.value() == doctest::Approx(8.0 / 3.0));
  CHECK(r.environment == Environment::Negation);
  CHECK(r.tokens[r.event_span.start] == "he");
  CHECK(r.event_span.size() == 2);
}

TEST_CASE("unified token-per-line and headed formats") {
  const auto fb = load_unified(fixture("factbank_train.tsv"), Dataset::FactBank);
  REQUIRE(fb.size() == 3);
  CHECK(fb[0].id == "fb:factbank_train:0");
  CHECK(fb[0].split == Split::Train);
  CHECK(fb[0].tokens[fb[0].event_span.start] == "announced");
  CHECK(fb[1].tokens[fb[1].event_span.start] == "expand");
  CHECK(fb[2].gold.value() == 0.0);
  CHECK(!fb[0].verb.has_value());

  const auto uw = load_unified(fixture("uw_dev.tsv"), Dataset::UW);
  REQUIRE(uw.size() == 2);
  CHECK(uw[0].split == Split::Dev);
  CHECK(uw[0].tokens[uw[0].event_span.start] == "collapsed");
  CHECK(uw[1].gold.value() == -0.4);

  TempDir dir("uni");
  CHECK_THROWS_AS(load_unified(dir.write("x.tsv", "1\tHe\t_\n2\tran\t3.5\n"), Dataset::UW), Error);
  CHECK_THROWS_AS(load_unified(dir.write("y.tsv", "sentence\tevent_start\tscore\nHe ran\t2\t1\n"), Dataset::UW),
                  Error);
}

TEST_CASE("span resolution picks root or whole clause") {
  const auto cb = load_cb(fixture("cb_spans.tsv"));
  const auto parses = conllu::read(fixture("cb_spans.conllu"));
  const auto resolved = resolve_spans(cb.records, parses);
  REQUIRE(resolved.size() == 5);
  auto text = [](const EventRecord& r) {
    std::string s;
    for (auto i = r.event_span.start; i < r.event_span.end; ++i) s += (s.empty() ? "" : " ") + r.tokens[i];
    return s;
  };
  CHECK(text(resolved[0]) == "left");
  CHECK(resolved[0].span_rule == "root");
  CHECK(text(resolved[1]) == "he did not leave");
  CHECK(resolved[1].span_rule == "clause:neg");
  CHECK(text(resolved[2]) == "he might leave");
  CHECK(resolved[2].span_rule == "clause:modal");
  CHECK(text(resolved[3]) == "he quickly left");
  CHECK(resolved[3].span_rule == "clause:adverb");
  CHECK(text(resolved[4]) == "he has to leave");
  CHECK(resolved[4].span_rule == "clause:modal");
}

TEST_CASE("span resolution preconditions") {
  const auto cb = load_cb(fixture("cb_spans.tsv"));
  const auto parses = conllu::read(fixture("cb_spans.conllu"));
  CHECK_THROWS_AS(resolve_event_span(cb.records[0], parses[1]), Error);  // token mismatch
  auto fb = load_unified(fixture("factbank_train.tsv"), Dataset::FactBank);
  CHECK_THROWS_AS(resolve_event_span(fb[0], parses[0]), Error);
  std::vector<conllu::Sentence> too_few(parses.begin(), parses.begin() + 2);
  CHECK_THROWS_AS(resolve_spans(cb.records, too_few), Error);
}

TEST_CASE("allocate minimizes squared deviation from the quotas") {
  const std::vector<std::array<double, 3>> ratio_sets{
      {0.44, 0.12, 0.44}, {1.0 / 3, 1.0 / 3, 1.0 / 3}, {0.8, 0.1, 0.1}, {0.5, 0.0, 0.5}, {0.7, 0.2, 0.1}};
  for (const auto& ratios : ratio_sets) {
    for (std::size_t n = 0; n <= 60; ++n) {
      const auto got = allocate(n, ratios);
      CHECK(got[0] + got[1] + got[2] == n);
      auto cost = [&](std::size_t a, std::size_t b, std::size_t c) {
        const double q[3] = {ratios[0] * n, ratios[1] * n, ratios[2] * n};
        return (a - q[0]) * (a - q[0]) + (b - q[1]) * (b - q[1]) + (c - q[2]) * (c - q[2]);
      };
      double best = 1e300;
      for (std::size_t a = 0; a <= n; ++a) {
        for (std::size_t b = 0; a + b <= n; ++b) best = std::min(best, cost(a, b, n - a - b));
      }
      CHECK(cost(got[0], got[1], got[2]) == doctest::Approx(best).epsilon(1e-9));
    }
  }
  CHECK(allocate(5026, {0.44, 0.12, 0.44})[1] == 603);
}

namespace {

std::vector<EventRecord> verb_items(const std::map<std::string, std::size_t>& sizes) {
  std::vector<EventRecord> out;
  for (const auto& [verb, n] : sizes) {
    for (std::size_t i = 0; i < n; ++i) {
      auto r = testing_support::make_item("mv:f:" + verb + std::to_string(i), Dataset::MV, 0.0, verb, "V_that_S");
      r.split = Split::Unassigned;
      out.push_back(r);
    }
  }
  return out;
}

}  // namespace

TEST_CASE("stratified split is per-verb proportional and seed-deterministic") {
  const std::map<std::string, std::size_t> sizes{{"know", 25}, {"think", 9}, {"say", 1}, {"manage", 50}};
  const auto items = verb_items(sizes);
  SplitSpec spec;
  spec.seed = 7;
  const auto a = stratified_split(items, spec);
  const auto b = stratified_split(items, spec);
  CHECK(io::to_jsonl(a) == io::to_jsonl(b));

  std::map<std::string, std::array<std::size_t, 3>> counts;
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].id == items[i].id);
    REQUIRE(a[i].split != Split::Unassigned);
    ++counts[*a[i].verb][static_cast<std::size_t>(a[i].split)];
  }
  for (const auto& [verb, n] : sizes) CHECK(counts[verb] == allocate(n, spec.ratios));

  spec.seed = 8;
  CHECK(io::to_jsonl(stratified_split(items, spec)) != io::to_jsonl(a));
}

TEST_CASE("split preconditions") {
  SplitSpec bad;
  bad.ratios = {0.5, 0.5, 0.5};
  CHECK_THROWS_AS(bad.validate(), Error);
  bad.ratios = {1.2, -0.1, -0.1};
  CHECK_THROWS_AS(bad.validate(), Error);

  const auto fb = load_unified(fixture("factbank_train.tsv"), Dataset::FactBank);
  try {
    stratified_split(fb, SplitSpec{});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("fb:factbank_train:0") != std::string::npos);
  }
  SplitSpec plain;
  plain.stratify = StratifyKey::None;
  CHECK(stratified_split(fb, plain).size() == 3);
}
