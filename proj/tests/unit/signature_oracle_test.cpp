#include <doctest.h>

#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "factuality/io.hpp"
#include "factuality/oracle.hpp"
#include "factuality/signature.hpp"
#include "support.hpp"

using namespace factuality;
using namespace factuality::signature;
using testing_support::make_item;

namespace {

Lexicon shipped_lexicon() { return load_lexicon(FACTUALITY_LEXICON); }

}  // namespace

TEST_CASE("projection matches the golden truth table") {
  std::ifstream in(testing_support::golden("projection_truth_table.tsv"));
  REQUIRE(in);
  std::string line;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::string sig, env, policy, expected;
    std::getline(ss, sig, '\t');
    std::getline(ss, env, '\t');
    std::getline(ss, policy, '\t');
    std::getline(ss, expected, '\t');
    const Signature s{parse_category(sig.substr(0, 1)), parse_category(sig.substr(2, 1))};
    INFO(line);
    CHECK(project(s, parse_environment(env), parse_policy(policy)) == parse_category(expected));
    ++rows;
  }
  CHECK(rows == 90);
}

TEST_CASE("manage to and forget that/to behave as described") {
  const auto lex = shipped_lexicon();
  auto manage = make_item("rp:x:0", Dataset::RP, 3.0, "manage", "V_to_VP");
  auto p = predict_item(manage, lex, EnvironmentPolicy::Uniform);
  REQUIRE(p);
  CHECK(p->category == Category::Plus);
  CHECK(p->score.value() == 3.0);

  manage.polarity = Polarity::Negative;
  manage.environment = Environment::Negation;
  p = predict_item(manage, lex, EnvironmentPolicy::Uniform);
  REQUIRE(p);
  CHECK(p->category == Category::Minus);

  auto forget_that = make_item("mv:x:1", Dataset::MV, 3.0, "forget", "V_that_S", Polarity::Negative);
  CHECK(predict_item(forget_that, lex, EnvironmentPolicy::Uniform)->category == Category::Plus);
  forget_that.polarity = Polarity::Positive;
  forget_that.environment = Environment::None;
  CHECK(predict_item(forget_that, lex, EnvironmentPolicy::Uniform)->category == Category::Plus);

  auto forget_to = make_item("mv:x:2", Dataset::MV, 3.0, "forget", "V_to_VP", Polarity::Positive);
  CHECK(predict_item(forget_to, lex, EnvironmentPolicy::Uniform)->category == Category::Minus);
  forget_to.polarity = Polarity::Negative;
  forget_to.environment = Environment::Negation;
  CHECK(predict_item(forget_to, lex, EnvironmentPolicy::Uniform)->category == Category::Plus);
}

TEST_CASE("lexicon lookup falls back through passive and aspect") {
  Lexicon lex;
  lex.add("manage", Frame("V_to_VP"), {Category::Plus, Category::Minus});
  lex.add("know", Frame("V_that_S"), {Category::Plus, Category::Plus});
  CHECK(lex.lookup("manage", Frame("V_to_VP_ev")) == Signature{Category::Plus, Category::Minus});
  CHECK(lex.lookup("know", Frame("was_Ved_that_S")) == Signature{Category::Plus, Category::Plus});
  CHECK(!lex.lookup("know", Frame("V_to_VP")).has_value());
  CHECK_THROWS_AS(lex.add("know", Frame("V_that_S"), {}), Error);
}

TEST_CASE("predict_item outcomes and preconditions") {
  const auto lex = shipped_lexicon();
  auto unknown = make_item("mv:x:0", Dataset::MV, 0.0, "hope", "V_that_S");
  CHECK(!predict_item(unknown, lex, EnvironmentPolicy::Uniform).has_value());

  auto no_verb = unknown;
  no_verb.verb.reset();
  CHECK_THROWS_AS(predict_item(no_verb, lex, EnvironmentPolicy::Uniform), Error);

  auto bare = unknown;
  bare.frame.reset();
  bare.environment.reset();
  bare.polarity.reset();
  CHECK_THROWS_AS(predict_item(bare, lex, EnvironmentPolicy::Uniform), Error);

  auto modal = make_item("cb:x:0", Dataset::CB, 0.0, "know", "V_that_S");
  modal.environment = Environment::Modal;
  modal.polarity.reset();
  CHECK(predict_item(modal, lex, EnvironmentPolicy::Uniform)->category == Category::Plus);
  auto add = make_item("cb:x:1", Dataset::CB, 0.0, "add", "V_that_S");
  add.environment = Environment::Question;
  add.polarity.reset();
  CHECK(predict_item(add, lex, EnvironmentPolicy::Uniform)->category == Category::Plus);
  CHECK(predict_item(add, lex, EnvironmentPolicy::NegationOnly)->category == Category::Neutral);

  const std::vector<EventRecord> batch{unknown, modal, add};
  const auto all = predict_all(batch, lex, EnvironmentPolicy::Uniform);
  REQUIRE(all.size() == 3);
  CHECK(!all[0]);
  CHECK(all[1]->category == Category::Plus);
}

TEST_CASE("lexicon parser reports line numbers") {
  try {
    parse_lexicon("# c\nknow\tV_that_S\t+\t+\nthink\tV_that_S\t+\n", "lex.tsv");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("lex.tsv:3") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_lexicon("know\tV_that_S\tyes\t+\n", "lex.tsv"), Error);
  CHECK(shipped_lexicon().size() >= 24);
}

// --- oracle ---------------------------------------------------------------

using namespace factuality::oracle;

TEST_CASE("feature schemas validate their tiers") {
  CHECK_THROWS_AS(FeatureSchema({}), Error);
  CHECK_THROWS_AS(FeatureSchema({{Feature::Verb}, {}}), Error);
  CHECK_THROWS_AS(FeatureSchema({{Feature::Verb}, {Feature::Verb, Feature::Frame}}), Error);
  CHECK_THROWS_AS(FeatureSchema({{Feature::Verb}, {Feature::Verb}}), Error);
  CHECK(FeatureSchema::embedded().size() == 4);
  CHECK(FeatureSchema::commitment_bank().size() == 3);
  CHECK(FeatureSchema::for_dataset(Dataset::CB).tiers()[0] ==
        std::vector<Feature>{Feature::Verb, Feature::Environment});
}

namespace {

/// Independent reference: linear scan over the raw training list.
std::optional<std::pair<double, std::size_t>> brute_force(const EventRecord& q,
                                                          const std::vector<EventRecord>& train,
                                                          const FeatureSchema& schema) {
  for (std::size_t t = 0; t < schema.size(); ++t) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& r : train) {
      bool match = true;
      for (auto f : schema.tiers()[t]) match = match && feature_value(r, f) == feature_value(q, f);
      if (match) {
        sum += r.gold.value();
        ++n;
      }
    }
    if (n) return std::make_pair(sum / static_cast<double>(n), t);
  }
  return std::nullopt;
}

}  // namespace

TEST_CASE("expected inference equals a brute-force scan on random queries") {
  std::mt19937_64 rng(2024);
  const std::vector<std::string> verbs{"know", "think", "manage", "forget", "say", "pretend"};
  const std::vector<std::string> frames{"V_that_S", "V_to_VP", "V_NP_to_VP"};
  std::uniform_int_distribution<std::size_t> vi(0, verbs.size() - 1), fi(0, frames.size() - 1), bit(0, 1);
  std::uniform_real_distribution<double> gold(-3.0, 3.0);

  std::vector<EventRecord> train;
  for (std::size_t i = 0; i < 300; ++i) {
    // "say" never appears negated and "pretend" never in training, forcing backoff
    auto verb = verbs[vi(rng) % 5];
    auto pol = bit(rng) && verb != "say" ? Polarity::Negative : Polarity::Positive;
    train.push_back(make_item("mv:t:" + std::to_string(i), Dataset::MV, gold(rng), verb, frames[fi(rng)], pol,
                              Split::Train));
  }
  const auto schema = FeatureSchema::embedded();
  const auto index = build_index(train, schema);

  std::size_t backoffs = 0, deepest = 0;
  for (std::size_t q = 0; q < 1000; ++q) {
    auto item = make_item("mv:q:" + std::to_string(q), Dataset::MV, 0.0, verbs[vi(rng)], frames[fi(rng)],
                          bit(rng) ? Polarity::Negative : Polarity::Positive);
    const auto got = expected_inference(item, index);
    const auto want = brute_force(item, train, schema);
    REQUIRE(got.has_value() == want.has_value());
    if (!got) continue;
    CHECK(got->score.value() == doctest::Approx(want->first).epsilon(1e-9));
    CHECK(got->tier == want->second);
    if (got->tier > 0) ++backoffs;
    deepest = std::max(deepest, got->tier);
  }
  CHECK(backoffs > 0);
  CHECK(deepest == 3);
}

TEST_CASE("CB schema backs off from verb+environment to environment") {
  auto cb = [](std::string id, double g, std::string verb, Environment env) {
    auto r = make_item(std::move(id), Dataset::CB, g, std::move(verb), "V_that_S", Polarity::Positive,
                       Split::Train);
    r.polarity.reset();
    r.environment = env;
    return r;
  };
  const std::vector<EventRecord> train{cb("a", 3, "know", Environment::Negation),
                                       cb("b", 1, "know", Environment::Negation),
                                       cb("c", -1, "think", Environment::Modal)};
  const auto index = build_index(train, FeatureSchema::commitment_bank());
  const auto exact = expected_inference(cb("q1", 0, "know", Environment::Negation), index);
  REQUIRE(exact);
  CHECK(exact->score.value() == 2.0);
  CHECK(exact->support == 2);
  const auto verb_only = expected_inference(cb("q2", 0, "know", Environment::Question), index);
  CHECK(verb_only->tier == 1);
  const auto env_only = expected_inference(cb("q3", 0, "believe", Environment::Modal), index);
  CHECK(env_only->tier == 2);
  CHECK(env_only->score.value() == -1.0);
  CHECK(!expected_inference(cb("q4", 0, "believe", Environment::Question), index));

  auto missing = train;
  missing[0].verb.reset();
  CHECK_THROWS_AS(build_index(missing, FeatureSchema::commitment_bank()), Error);
  CHECK_THROWS_AS(build_index({}, FeatureSchema::commitment_bank()), Error);
}

TEST_CASE("parallel batch query agrees with single queries") {
  std::vector<EventRecord> train;
  for (int i = 0; i < 50; ++i) {
    train.push_back(make_item("mv:t:" + std::to_string(i), Dataset::MV, (i % 7) - 3.0, i % 2 ? "know" : "think",
                              "V_that_S", i % 3 ? Polarity::Positive : Polarity::Negative, Split::Train));
  }
  const auto index = build_index(train, FeatureSchema::embedded());
  const auto all = expected_inference_all(train, index);
  for (std::size_t i = 0; i < train.size(); ++i) {
    CHECK(all[i]->score == expected_inference(train[i], index)->score);
  }
}

TEST_CASE("rule predictions: UDS-IH2 dropped, unknown ids rejected") {
  std::vector<EventRecord> items{make_item("fb:f:0", Dataset::FactBank, 1.0),
                                 make_item("uds:u:0", Dataset::UDSIH2, 1.0)};
  const auto r = parse_rule_predictions("fb:f:0\t2.5\nuds:u:0\t1.0\n", "rules.tsv", items);
  CHECK(r.scores.size() == 1);
  CHECK(r.scores.at("fb:f:0").value() == 2.5);
  CHECK(r.warnings.size() == 1);
  CHECK_THROWS_AS(parse_rule_predictions("fb:f:9\t1\n", "rules.tsv", items), Error);
  CHECK_THROWS_AS(parse_rule_predictions("fb:f:0\t1\nfb:f:0\t2\n", "rules.tsv", items), Error);
  CHECK_THROWS_AS(parse_rule_predictions("fb:f:0\t4\n", "rules.tsv", items), Error);
}
