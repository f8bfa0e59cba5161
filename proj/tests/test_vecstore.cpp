#include <doctest.h>
#include <zlib.h>

#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "termharm/error.hpp"
#include "termharm/vecstore.hpp"

using namespace termharm;
namespace fs = std::filesystem;

namespace {

struct TempFile {
  fs::path path;
  explicit TempFile(const std::string& name, const std::string& content, bool gzip = false)
      : path(fs::temp_directory_path() / ("termharm_vec_" + name)) {
    if (gzip) {
      gzFile f = gzopen(path.c_str(), "wb");
      gzwrite(f, content.data(), static_cast<unsigned>(content.size()));
      gzclose(f);
    } else {
      std::ofstream(path, std::ios::binary) << content;
    }
  }
  ~TempFile() { fs::remove(path); }
  std::string str() const { return path.string(); }
};

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error");
  return ErrorKind::Io;
}

}  // namespace

TEST_SUITE("vecstore") {

TEST_CASE("plain text vectors load with exact-case lookup") {
  TempFile f("plain.txt", "the 0.5 -1 2\nValve 1e-3 0 0\r\n\nvalve 1 1 1");
  const auto s = load_vectors(f.str());
  CHECK(s.dimension() == 3);
  CHECK(s.size() == 3);
  CHECK(s.find("the")[1] == -1.0f);
  CHECK(s.find("Valve")[0] == doctest::Approx(1e-3));
  CHECK(s.find("valve")[2] == 1.0f);
  CHECK(s.find("VALVE").empty());
  CHECK(s.tokens() == std::vector<std::string>{"the", "Valve", "valve"});
}

TEST_CASE("gzip input and word2vec headers are accepted") {
  TempFile f("gz.txt.gz", "2 2\na 1 2\nb 3 4\n", true);
  const auto s = load_vectors(f.str());
  CHECK(s.dimension() == 2);
  CHECK(s.size() == 2);
  CHECK(s.find("b")[1] == 4.0f);
}

TEST_CASE("duplicate tokens keep the first vector") {
  TempFile f("dup.txt", "a 1 2\na 9 9\n");
  const auto s = load_vectors(f.str());
  CHECK(s.size() == 1);
  CHECK(s.find("a")[0] == 1.0f);
}

TEST_CASE("tokens with embedded spaces are joined") {
  TempFile f("space.txt", "a 1 2\nat & t 3 4\n");
  const auto s = load_vectors(f.str());
  CHECK(s.find("at & t")[0] == 3.0f);
}

TEST_CASE("keep filter limits storage") {
  TempFile f("keep.txt", "a 1 2\nb 3 4\nc 5 6\n");
  const auto s = load_vectors(f.str(), [](std::string_view t) { return t != "b"; });
  CHECK(s.size() == 2);
  CHECK_FALSE(s.contains("b"));
}

TEST_CASE("malformed vector files are rejected") {
  TempFile short_row("short.txt", "a 1 2 3\nb 1 2\n");
  TempFile bad_float("badf.txt", "a 1 x\n");
  TempFile non_finite("inf.txt", "a 1 inf\n");
  TempFile empty("empty.txt", "\n\n");
  TempFile lone("lone.txt", "token\n");
  CHECK(kind_of([&] { load_vectors(short_row.str()); }) == ErrorKind::Parse);
  CHECK(kind_of([&] { load_vectors(bad_float.str()); }) == ErrorKind::Parse);
  CHECK(kind_of([&] { load_vectors(non_finite.str()); }) == ErrorKind::Parse);
  CHECK(kind_of([&] { load_vectors(empty.str()); }) == ErrorKind::Parse);
  CHECK(kind_of([&] { load_vectors(lone.str()); }) == ErrorKind::Parse);
  CHECK(kind_of([] { load_vectors("/nonexistent/vectors.txt"); }) == ErrorKind::Io);
}

TEST_CASE("store rejects bad rows") {
  WordVectorStore s(2);
  const float ok[] = {1, 2};
  const float three[] = {1, 2, 3};
  const float nan[] = {1, std::numeric_limits<float>::quiet_NaN()};
  CHECK(s.add("a", ok));
  CHECK_FALSE(s.add("a", ok));
  CHECK_THROWS_AS(s.add("b", three), Error);
  CHECK_THROWS_AS(s.add("c", nan), Error);
  CHECK_THROWS_AS(WordVectorStore(0), Error);
}

TEST_CASE("probability tables") {
  WordProbabilityTable t;
  t.add("the", 3);
  t.add("valve");
  t.add("pump", 0);
  CHECK(t.total() == 4);
  CHECK(t.size() == 2);
  CHECK(t.probability("the") == 0.75);
  CHECK(t.probability("The") == 0.0);
  CHECK(probability_of(t, "pump") == 0.0);
  CHECK(t.most_frequent(1) == std::vector<std::pair<std::string, std::uint64_t>>{{"the", 3}});
  CHECK(WordProbabilityTable{}.probability("x") == 0.0);

  const std::vector<std::string> tokens{"b", "a", "b"};
  const auto built = build_probability_table(tokens);
  CHECK(built.probability("b") == doctest::Approx(2.0 / 3.0));
  CHECK(built.most_frequent(5).size() == 2);
  CHECK_THROWS_AS(build_probability_table(std::vector<std::string>{}), Error);
}

TEST_CASE("frequency count files") {
  TempFile counts("counts.txt", "the 60\nvalve 40\n");
  const auto t = load_frequency_counts(counts.str());
  CHECK(t.probability("valve") == 0.4);

  TempFile bad("counts_bad.txt", "the sixty\n");
  TempFile neg("counts_neg.txt", "the -1\n");
  TempFile extra("counts_extra.txt", "the 1 2\n");
  TempFile empty("counts_empty.txt", "");
  CHECK(kind_of([&] { load_frequency_counts(bad.str()); }) == ErrorKind::Parse);
  CHECK(kind_of([&] { load_frequency_counts(neg.str()); }) == ErrorKind::Parse);
  CHECK(kind_of([&] { load_frequency_counts(extra.str()); }) == ErrorKind::Parse);
  CHECK(kind_of([&] { load_frequency_counts(empty.str()); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("raw text and corpus frequencies use the entry tokenizer") {
  TempFile text("text.txt", "The valve, the pump.\nvalve\n");
  const auto t = load_text_frequencies(text.str());
  CHECK(t.total() == 5);
  CHECK(t.count("valve") == 2);
  CHECK(t.count("The") == 1);

  std::istringstream in("1\tvalve|pump\tvalve part\ts\n");
  const auto corpus = parse_entry_corpus(in);
  const auto c = corpus_frequencies(corpus);
  CHECK(c.total() == 4);
  CHECK(c.probability("valve") == 0.5);
}

}
