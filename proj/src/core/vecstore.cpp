#include "termharm/vecstore.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>

#include "termharm/error.hpp"
#include "termharm/tokenize.hpp"
#include "text_util.hpp"

namespace termharm {

namespace {

// Line reader over plain or gzip-compressed files (gzread is transparent for
// uncompressed input).
class GzLineReader {
 public:
  explicit GzLineReader(const std::string& path) : file_(gzopen(path.c_str(), "rb"), &gzclose) {
    if (!file_) fail(ErrorKind::Io, "cannot open " + path);
    gzbuffer(file_.get(), 1 << 20);
  }

  bool next(std::string& line) {
    line.clear();
    char buf[8192];
    while (true) {
      if (!gzgets(file_.get(), buf, sizeof buf)) {
        int err = Z_OK;
        gzerror(file_.get(), &err);
        if (err != Z_OK && err != Z_STREAM_END) fail(ErrorKind::Io, "read error");
        return !line.empty();
      }
      line.append(buf);
      if (!line.empty() && line.back() == '\n') {
        line.pop_back();
        detail::strip_cr(line);
        return true;
      }
    }
  }

 private:
  std::unique_ptr<gzFile_s, int (*)(gzFile)> file_;
};

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// WordVectorStore

WordVectorStore::WordVectorStore(std::size_t dimension) : dimension_(dimension) {
  if (dimension == 0) fail(ErrorKind::InvalidArgument, "vector dimension must be positive");
}

bool WordVectorStore::add(std::string token, std::span<const float> values) {
  if (values.size() != dimension_)
    fail(ErrorKind::InvalidArgument, "dimension mismatch for '" + token + "': expected " +
                                         std::to_string(dimension_) + ", got " +
                                         std::to_string(values.size()));
  for (float v : values)
    if (!std::isfinite(v)) fail(ErrorKind::InvalidArgument, "non-finite component in '" + token + "'");
  if (index_.contains(token)) return false;
  index_.emplace(token, tokens_.size());
  tokens_.push_back(std::move(token));
  data_.insert(data_.end(), values.begin(), values.end());
  return true;
}

std::span<const float> WordVectorStore::find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return {};
  return {data_.data() + it->second * dimension_, dimension_};
}

WordVectorStore load_vectors(const std::string& path,
                             const std::function<bool(std::string_view)>& keep) {
  GzLineReader reader(path);
  std::string line;
  std::size_t line_no = 0;
  std::size_t dim = 0;
  std::unique_ptr<WordVectorStore> store;
  std::vector<float> values;

  while (reader.next(line)) {
    ++line_no;
    const auto fields = split_ws(line);
    if (fields.empty()) continue;
    if (!store) {
      if (fields.size() == 2 && detail::parse_int(fields[0]) && detail::parse_int(fields[1]))
        continue;  // word2vec header
      if (fields.size() < 2)
        fail(ErrorKind::Parse, "line " + std::to_string(line_no) + ": no vector components");
      dim = fields.size() - 1;
      store = std::make_unique<WordVectorStore>(dim);
    }
    if (fields.size() < dim + 1)
      fail(ErrorKind::Parse, "line " + std::to_string(line_no) + ": dimension mismatch, expected " +
                                 std::to_string(dim) + " components, got " +
                                 std::to_string(fields.size() - 1));
    // Some published vocabularies contain tokens with embedded spaces.
    const std::size_t token_fields = fields.size() - dim;
    std::string token(fields[0]);
    for (std::size_t k = 1; k < token_fields; ++k) {
      token += ' ';
      token += fields[k];
    }
    if (keep && !keep(token)) continue;
    values.clear();
    for (std::size_t k = token_fields; k < fields.size(); ++k) {
      const auto v = detail::parse_double(fields[k]);
      if (!v)
        fail(ErrorKind::Parse, "line " + std::to_string(line_no) + ": unparseable float '" +
                                   std::string(fields[k]) + "'");
      if (!std::isfinite(*v))
        fail(ErrorKind::Parse, "line " + std::to_string(line_no) + ": non-finite component");
      values.push_back(static_cast<float>(*v));
    }
    store->add(std::move(token), values);
  }
  if (!store) fail(ErrorKind::Parse, "vector file " + path + " is empty");
  return std::move(*store);
}

// ---------------------------------------------------------------------------
// WordProbabilityTable

void WordProbabilityTable::add(std::string_view token, std::uint64_t count) {
  if (count == 0) return;
  counts_[std::string(token)] += count;
  total_ += count;
}

std::uint64_t WordProbabilityTable::count(std::string_view token) const {
  auto it = counts_.find(std::string(token));
  return it == counts_.end() ? 0 : it->second;
}

double WordProbabilityTable::probability(std::string_view token) const {
  if (total_ == 0) return 0.0;
  return static_cast<double>(count(token)) / static_cast<double>(total_);
}

std::vector<std::pair<std::string, std::uint64_t>> WordProbabilityTable::most_frequent(
    std::size_t k) const {
  std::vector<std::pair<std::string, std::uint64_t>> all(counts_.begin(), counts_.end());
  std::sort(all.begin(), all.end(), [](const auto& x, const auto& y) {
    return x.second != y.second ? x.second > y.second : x.first < y.first;
  });
  if (all.size() > k) all.resize(k);
  return all;
}

WordProbabilityTable build_probability_table(std::span<const std::string> tokens) {
  if (tokens.empty()) fail(ErrorKind::InvalidArgument, "empty token stream");
  WordProbabilityTable table;
  for (const auto& t : tokens) table.add(t);
  return table;
}

double probability_of(const WordProbabilityTable& table, std::string_view token) {
  return table.probability(token);
}

WordProbabilityTable load_frequency_counts(const std::string& path) {
  GzLineReader reader(path);
  WordProbabilityTable table;
  std::string line;
  std::size_t line_no = 0;
  while (reader.next(line)) {
    ++line_no;
    const auto fields = split_ws(line);
    if (fields.empty()) continue;
    if (fields.size() != 2)
      fail(ErrorKind::Parse, "line " + std::to_string(line_no) + ": expected 'token count'");
    const auto n = detail::parse_int(fields[1]);
    if (!n || *n < 0)
      fail(ErrorKind::Parse, "line " + std::to_string(line_no) + ": bad count '" +
                                 std::string(fields[1]) + "'");
    table.add(fields[0], static_cast<std::uint64_t>(*n));
  }
  if (table.total() == 0) fail(ErrorKind::InvalidArgument, "frequency file " + path + " is empty");
  return table;
}

WordProbabilityTable load_text_frequencies(const std::string& path) {
  GzLineReader reader(path);
  std::vector<std::string> tokens;
  std::string line;
  while (reader.next(line))
    for (auto& t : tokenize(line)) tokens.push_back(std::move(t));
  return build_probability_table(tokens);
}

WordProbabilityTable corpus_frequencies(const EntryCorpus& corpus) {
  std::vector<std::string> tokens;
  for (const auto& e : corpus.entries())
    for (auto& t : entry_token_bag(e, TokenInput::Entries)) tokens.push_back(std::move(t));
  return build_probability_table(tokens);
}

}  // namespace termharm
