#include <doctest.h>

#include <cmath>

#include "factuality/conllu.hpp"
#include "factuality/core.hpp"
#include "factuality/io.hpp"
#include "support.hpp"

using namespace factuality;
using testing_support::make_item;

TEST_CASE("score range is closed at both ends") {
  CHECK(Score(-3.0).value() == -3.0);
  CHECK(Score(3.0).value() == 3.0);
  CHECK_THROWS_AS(Score(3.0000001), Error);
  CHECK_THROWS_AS(Score(-3.5), Error);
  CHECK_THROWS_AS(Score(std::nan("")), Error);
}

TEST_CASE("score_to_category puts the +-0.5 boundary in Neutral") {
  CHECK(score_to_category(Score(-0.5)) == Category::Neutral);
  CHECK(score_to_category(Score(0.5)) == Category::Neutral);
  CHECK(score_to_category(Score(0.5000001)) == Category::Plus);
  CHECK(score_to_category(Score(-0.51)) == Category::Minus);
  CHECK(score_to_category(Score(1.0), 1.0, 2.0) == Category::Neutral);
  CHECK_THROWS_AS(score_to_category(Score(0.0), 1.0, 1.0), Error);
  CHECK(category_to_score(Category::Plus).value() == 3.0);
  CHECK(category_to_score(Category::Minus).value() == -3.0);
  CHECK(category_to_score(Category::Neutral).value() == 0.0);
}

TEST_CASE("enum names round-trip") {
  for (auto d : {Dataset::MV, Dataset::CB, Dataset::RP, Dataset::FactBank, Dataset::MEANTIME, Dataset::UW,
                 Dataset::UDSIH2}) {
    CHECK(parse_dataset(to_string(d)) == d);
  }
  for (auto e : {Environment::None, Environment::Negation, Environment::Modal, Environment::Question,
                 Environment::Conditional}) {
    CHECK(parse_environment(to_string(e)) == e);
  }
  for (auto c : {Category::Minus, Category::Neutral, Category::Plus}) {
    CHECK(parse_category(to_symbol(c)) == c);
  }
  CHECK_THROWS_AS(parse_dataset("wikipedia"), Error);
  CHECK(make_record_id(Dataset::FactBank, "train", 7) == "fb:train:7");
}

TEST_CASE("frames: registration, passive and aspect fallbacks") {
  CHECK_THROWS_AS(Frame("V_whether_S"), Error);
  CHECK(Frame("was_Ved_that_S").active() == Frame("V_that_S"));
  CHECK(Frame("V_that_S").active() == Frame("V_that_S"));
  CHECK(Frame("V_to_VP_ev").aspect_neutral() == Frame("V_to_VP"));
  CHECK(!Frame("V_that_S").aspect_neutral().has_value());
  for (const auto& name : Frame::vocabulary()) CHECK(Frame::is_registered(name));
}

TEST_CASE("validate catches structural violations") {
  auto r = make_item("cb:x:0", Dataset::CB, 1.0);
  CHECK_NOTHROW(validate(r));

  auto bad_span = r;
  bad_span.event_span = {0, 2};
  CHECK_THROWS_AS(validate(bad_span), Error);

  auto bad_gold = r;
  bad_gold.annotations = {1.0, 2.0};
  CHECK_THROWS_AS(validate(bad_gold), Error);

  auto bad_env = r;
  bad_env.polarity = Polarity::Negative;  // environment still None
  CHECK_THROWS_AS(validate(bad_env), Error);
}

TEST_CASE("table parser handles quotes and reports ragged rows") {
  const auto t = io::parse_table("a,b\n\"x, y\",\"say \"\"hi\"\"\"\n", ',', "t.csv");
  REQUIRE(t.rows.size() == 1);
  CHECK(t.rows[0][0] == "x, y");
  CHECK(t.rows[0][1] == "say \"hi\"");
  CHECK(t.column("b") == 1u);
  CHECK(!t.column("c"));
  try {
    io::parse_table("a\tb\n1\t2\n3\n", '\t', "t.tsv");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("t.tsv:3") != std::string::npos);
  }
}

TEST_CASE("simple_tokenize detaches trailing punctuation only") {
  const auto t = io::simple_tokenize("He didn't know that it rained.");
  const std::vector<std::string> want{"He", "didn't", "know", "that", "it", "rained", "."};
  CHECK(t == want);
}

TEST_CASE("numeric parsing is strict") {
  CHECK(io::parse_double("1.5", "ctx") == 1.5);
  CHECK(io::parse_double(" -2 ", "ctx") == -2.0);
  CHECK_THROWS_AS(io::parse_double("1.5x", "ctx"), Error);
  CHECK_THROWS_AS(io::parse_int("", "ctx"), Error);
}

TEST_CASE("FNV-1a 64 matches published test vectors") {
  CHECK(io::fnv1a64_hex("") == "cbf29ce484222325");
  CHECK(io::fnv1a64_hex("a") == "af63dc4c8601ec8c");
  CHECK(io::fnv1a64_hex("foobar") == "85944171f73967e8");
}

TEST_CASE("JSON Lines round-trip preserves every field") {
  auto r = make_item("rp:f:3", Dataset::RP, 1.5, "manage", "V_to_VP", Polarity::Negative, Split::Dev);
  r.annotations = {1.5, 1.5, 1.5};
  r.genre = "news";
  r.span_rule = "root";
  auto u = make_item("fb:train:0", Dataset::FactBank, -2.0);
  u.verb.reset();
  u.frame.reset();
  u.polarity.reset();
  u.environment.reset();
  u.annotations.clear();

  testing_support::TempDir dir("jsonl");
  const auto p = dir.write("a.jsonl", io::to_jsonl({r, u}));
  const auto back = io::read_jsonl(p);
  REQUIRE(back.size() == 2);
  CHECK(back[0] == r);
  CHECK(back[1] == u);
}

TEST_CASE("record_from_json rejects inconsistent records") {
  auto j = io::to_json(make_item("cb:x:0", Dataset::CB, 1.0));
  j["gold"] = 2.0;
  CHECK_THROWS_AS(io::record_from_json(j), Error);
  j["gold"] = 4.0;
  CHECK_THROWS_AS(io::record_from_json(j), Error);
}

TEST_CASE("CoNLL-U reader skips multiword and empty nodes") {
  const std::string text =
      "# sent_id = s1\n"
      "# text = I don't know\n"
      "1\tI\tI\tPRON\tPRP\t_\t4\tnsubj\t_\t_\n"
      "2-3\tdon't\t_\t_\t_\t_\t_\t_\t_\t_\n"
      "2\tdo\tdo\tAUX\tVBP\t_\t4\taux\t_\t_\n"
      "3\tn't\tnot\tPART\tRB\t_\t4\tadvmod\t_\t_\n"
      "3.1\tx\tx\tX\tX\t_\t_\t_\t_\t_\n"
      "4\tknow\tknow\tVERB\tVB\t_\t0\troot\t_\t_\n\n";
  const auto s = conllu::parse(text, "mem");
  REQUIRE(s.size() == 1);
  CHECK(s[0].sent_id == "s1");
  CHECK(s[0].tokens.size() == 4);
  CHECK(s[0].children(3) == std::vector<std::size_t>{0, 1, 2});
  CHECK(s[0].subtree(3) == std::vector<std::size_t>{0, 1, 2, 3});
  CHECK(conllu::base_relation("ccomp:pass") == "ccomp");
}

TEST_CASE("CoNLL-U reader rejects malformed input") {
  CHECK_THROWS_AS(conllu::parse("1\tI\tI\tPRON\n\n", "mem"), Error);
  CHECK_THROWS_AS(conllu::parse("1\tI\tI\tPRON\tPRP\t_\t5\tnsubj\t_\t_\n\n", "mem"), Error);
  CHECK_THROWS_AS(conllu::parse("2\tI\tI\tPRON\tPRP\t_\t0\troot\t_\t_\n\n", "mem"), Error);
}
