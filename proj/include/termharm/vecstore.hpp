#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "termharm/termbase.hpp"

namespace termharm {

// Pre-trained word vectors, stored as float rows in one contiguous block.
class WordVectorStore {
 public:
  explicit WordVectorStore(std::size_t dimension);

  // Returns false (and keeps the earlier vector) when the token already exists.
  // Non-finite components and dimension mismatches throw.
  bool add(std::string token, std::span<const float> values);

  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return tokens_.size(); }

  // Exact-case lookup; empty span when absent.
  std::span<const float> find(std::string_view token) const;
  bool contains(std::string_view token) const { return !find(token).empty(); }

  const std::vector<std::string>& tokens() const { return tokens_; }

 private:
  std::size_t dimension_;
  std::vector<std::string> tokens_;
  std::vector<float> data_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Reads "token v1 ... vd" lines (GloVe text layout, optionally gzip-compressed;
// a leading word2vec "count dim" header is skipped). When `keep` is given, only
// tokens for which it returns true are stored; dimension checks still apply to
// every line.
WordVectorStore load_vectors(const std::string& path,
                             const std::function<bool(std::string_view)>& keep = {});

class WordProbabilityTable {
 public:
  void add(std::string_view token, std::uint64_t count = 1);

  std::uint64_t count(std::string_view token) const;
  std::uint64_t total() const { return total_; }
  std::size_t size() const { return counts_.size(); }
  bool contains(std::string_view token) const { return count(token) > 0; }

  // count/total for known tokens, 0 otherwise (exact case).
  double probability(std::string_view token) const;

  // Top-k tokens by count, ties by token.
  std::vector<std::pair<std::string, std::uint64_t>> most_frequent(std::size_t k) const;

 private:
  std::unordered_map<std::string, std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

// Throws InvalidArgument on an empty stream.
WordProbabilityTable build_probability_table(std::span<const std::string> tokens);
double probability_of(const WordProbabilityTable& table, std::string_view token);

// "token count" lines, as in published enwiki frequency lists.
WordProbabilityTable load_frequency_counts(const std::string& path);
// Tokenizes a raw text file with the entry tokenizer and counts the tokens.
WordProbabilityTable load_text_frequencies(const std::string& path);
// Token frequencies over all entry tokens (terms and definitions) of a corpus.
WordProbabilityTable corpus_frequencies(const EntryCorpus& corpus);

}  // namespace termharm
