#include <doctest.h>

#include <sstream>

#include "termharm/error.hpp"
#include "termharm/termbase.hpp"

using namespace termharm;

namespace {

EntryCorpus corpus_from(const std::string& text) {
  std::istringstream in(text);
  return parse_entry_corpus(in);
}

RatingDataset dataset_from(const std::string& text, const EntryCorpus* corpus = nullptr) {
  std::istringstream in(text);
  return parse_rating_dataset(in, corpus);
}

std::string error_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_SUITE("termbase") {

TEST_CASE("corpus parsing keeps order and splits terms") {
  const auto c = corpus_from(
      "id\tterms\tdefinition\tsource\n"
      "7\tvalve| shut-off valve \tdevice that controls flow\tstd A\n"
      "3\tpump\tdevice that moves fluid\tstd B\r\n");
  REQUIRE(c.size() == 2);
  CHECK(c.entries()[0].id == "7");
  CHECK(c.entries()[0].terms == std::vector<std::string>{"valve", "shut-off valve"});
  CHECK(c.at("3").definition == "device that moves fluid");
  CHECK(c.at("3").source == "std B");
  CHECK_FALSE(c.contains("4"));
  CHECK_THROWS_AS(c.at("4"), Error);
}

TEST_CASE("corpus parsing rejects malformed records with line numbers") {
  CHECK(error_of([] { corpus_from("1\tvalve\tdef\tsrc\n2\tpump\n"); }).starts_with("line 2: "));
  CHECK(error_of([] { corpus_from("1\t \tdef\tsrc\n"); }).find("no terms") != std::string::npos);
  CHECK(error_of([] { corpus_from("1\tvalve\t  \tsrc\n"); }).find("empty definition") !=
        std::string::npos);
  try {
    corpus_from("1\tvalve\tdef\tsrc\n1\tpump\tdef\tsrc\n");
    FAIL("duplicate id accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Duplicate);
    CHECK(std::string(e.what()).starts_with("line 2: "));
  }
}

TEST_CASE("canonical corpus files round-trip byte for byte") {
  const std::string canonical =
      "id\tterms\tdefinition\tsource\n"
      "1\tvalve|shut-off valve\tdevice that controls flow\tstd A\n"
      "2\tPumpe\tGerät, das Flüssigkeit fördert\t\n";
  std::ostringstream out;
  write_entry_corpus(corpus_from(canonical), out);
  CHECK(out.str() == canonical);
}

TEST_CASE("rating scale has five bilingual categories from 4 down to 0") {
  const auto scale = rating_scale();
  REQUIRE(scale.size() == 5);
  for (std::size_t i = 0; i < scale.size(); ++i) {
    CHECK(scale[i].value == 4 - static_cast<int>(i));
    CHECK_FALSE(scale[i].label_en.empty());
    CHECK_FALSE(scale[i].label_de.empty());
    CHECK_FALSE(scale[i].examples.empty());
  }
  CHECK(in_scale(0));
  CHECK(in_scale(4));
  CHECK_FALSE(in_scale(-1));
  CHECK_FALSE(in_scale(5));
}

TEST_CASE("medians are exact in half points and round half up at the boundary") {
  const auto m = median_of({1, 2});
  CHECK(m.value() == 1.5);
  CHECK(m.is_half());
  CHECK(m.rounded() == 2);
  CHECK(median_of({0, 1}).rounded() == 1);
  CHECK(median_of({3, 4}).rounded() == 4);
  CHECK(median_of({4, 0, 2}).value() == 2.0);
  CHECK_FALSE(median_of({4, 0, 2}).is_half());
  CHECK(median_of({0, 0, 4, 4}).value() == 2.0);
  CHECK(median_of({3}).rounded() == 3);
  CHECK_THROWS_AS(median_of({}), Error);
}

TEST_CASE("dataset parsing groups ratings by pair") {
  const auto d = dataset_from(
      "pair_id\tleft_id\tright_id\tkind\tintended_rating\trater_id\trating\n"
      "p1\t1\t2\tdataset\t\tu1\t3\n"
      "p1\t1\t2\tdataset\t\tu2\t4\n"
      "c1\tx\ty\tcontrol\t0\tu1\t1\n"
      "p2\t2\t3\tdataset\t\t\t\n");
  REQUIRE(d.pairs().size() == 3);
  CHECK(d.rating_count() == 3);
  CHECK(d.raters() == std::vector<std::string>{"u1", "u2"});
  CHECK(d.rating("p1", "u2") == 4);
  CHECK_FALSE(d.rating("p2", "u1").has_value());
  CHECK(d.pair("c1").intended_rating == 0);
  CHECK(median_rating(d, "p1").value() == 3.5);
  CHECK_THROWS_AS(median_rating(d, "p2"), Error);
  CHECK(d.filtered(PairKind::Control).pairs().size() == 1);
  CHECK(d.without_rater("u2").rating_count() == 2);
  CHECK_THROWS_AS(d.without_rater("nobody"), Error);
}

TEST_CASE("dataset parsing rejects bad records") {
  auto kind_of = [](const std::string& text) {
    try {
      dataset_from(text);
    } catch (const Error& e) {
      return e.kind();
    }
    FAIL("accepted: " << text);
    return ErrorKind::Io;
  };
  CHECK(kind_of("p1\t1\t2\tdataset\t\tu1\t5\n") == ErrorKind::InvalidArgument);
  CHECK(kind_of("p1\t1\t2\tdataset\t\tu1\tx\n") == ErrorKind::Parse);
  CHECK(kind_of("p1\t1\t2\tsomething\t\tu1\t1\n") == ErrorKind::Parse);
  CHECK(kind_of("p1\t1\t2\tdataset\t\tu1\t1\np1\t1\t2\tdataset\t\tu1\t2\n") ==
        ErrorKind::Duplicate);
  CHECK(kind_of("p1\t1\t2\tdataset\t\tu1\t1\np1\t1\t3\tdataset\t\tu2\t2\n") ==
        ErrorKind::Duplicate);
  CHECK(kind_of("p1\t1\t1\tdataset\t\tu1\t1\n") == ErrorKind::InvalidArgument);
  CHECK(kind_of("c1\t1\t2\tcontrol\t\tu1\t1\n") == ErrorKind::InvalidArgument);
  CHECK(kind_of("p1\t1\t2\tdataset\t\tu1\t\n") == ErrorKind::Parse);
  CHECK(kind_of("p1\t1\t2\tdataset\t\tu1\n") == ErrorKind::Parse);
}

TEST_CASE("dataset entries are checked against a corpus, controls are not") {
  const auto c = corpus_from("1\tvalve\tdef\ts\n2\tpump\tdef\ts\n");
  CHECK_NOTHROW(dataset_from("p1\t1\t2\tdataset\t\tu1\t1\nc1\tq\tr\tcontrol\t4\tu1\t4\n", &c));
  try {
    dataset_from("p1\t1\t9\tdataset\t\tu1\t1\n", &c);
    FAIL("unknown entry accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotFound);
    CHECK(std::string(e.what()).find("9") != std::string::npos);
  }
}

TEST_CASE("dataset files round-trip") {
  const std::string text =
      "pair_id\tleft_id\tright_id\tkind\tintended_rating\trater_id\trating\n"
      "p1\t1\t2\tdataset\t\tu1\t3\n"
      "p1\t1\t2\tdataset\t\tu2\t4\n"
      "p2\t2\t3\tdataset\t\t\t\n"
      "c1\tx\ty\tcontrol\t0\tu1\t1\n";
  std::ostringstream out;
  write_rating_dataset(dataset_from(text), out);
  CHECK(out.str() == text);
}

TEST_CASE("pairs compare entries without orientation") {
  RatingPair a{"p", "1", "2", PairKind::Dataset, {}};
  RatingPair b{"q", "2", "1", PairKind::Dataset, {}};
  RatingPair c{"r", "1", "3", PairKind::Dataset, {}};
  CHECK(a.same_entries(b));
  CHECK_FALSE(a.same_entries(c));
}

}
