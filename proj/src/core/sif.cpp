#include "termharm/sif.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>
#include <unordered_set>

#include "termharm/error.hpp"
#include "termharm/linalg.hpp"
#include "text_util.hpp"

namespace termharm {

void validate(const EmbeddingConfig& config) {
  if (!(config.a > 0.0) || !std::isfinite(config.a))
    fail(ErrorKind::InvalidArgument, "weighting parameter a must be positive");
  if (config.d_pcr < 0) fail(ErrorKind::InvalidArgument, "d_pcr must be non-negative");
}

double sif_weight(double a, double p) {
  if (!(a > 0.0)) fail(ErrorKind::InvalidArgument, "weighting parameter a must be positive");
  if (!(p >= 0.0 && p <= 1.0)) fail(ErrorKind::InvalidArgument, "probability outside [0, 1]");
  return a / (a + p);
}

std::span<const float> lookup_vector(const WordVectorStore& store, std::string_view token) {
  if (auto v = store.find(token); !v.empty()) return v;
  const auto lower = detail::ascii_lower(token);
  if (lower == token) return {};
  return store.find(lower);
}

double lookup_probability(const WordProbabilityTable& table, std::string_view token) {
  if (table.contains(token)) return table.probability(token);
  return table.probability(detail::ascii_lower(token));
}

EntryEmbedding weighted_average_embedding(std::span<const std::string> bag,
                                          const WordVectorStore& store,
                                          const WordProbabilityTable* table, double a) {
  if (!(a > 0.0)) fail(ErrorKind::InvalidArgument, "weighting parameter a must be positive");
  EntryEmbedding out;
  out.vector.assign(store.dimension(), 0.0);
  for (const auto& token : bag) {
    const auto vec = lookup_vector(store, token);
    if (vec.empty()) {
      ++out.oov_count;
      continue;
    }
    const double w = table ? sif_weight(a, lookup_probability(*table, token)) : 1.0;
    for (std::size_t i = 0; i < vec.size(); ++i) out.vector[i] += w * static_cast<double>(vec[i]);
    ++out.token_count;
  }
  if (out.token_count > 0) {
    const double n = static_cast<double>(out.token_count);
    for (double& x : out.vector) x /= n;
  }
  return out;
}

// ---------------------------------------------------------------------------
// EmbeddingMatrix

void EmbeddingMatrix::add_row(const EntryEmbedding& embedding) {
  add_row(embedding.entry_id, embedding.vector, embedding.token_count);
}

void EmbeddingMatrix::add_row(std::string id, std::span<const double> values,
                              std::size_t token_count) {
  if (values.size() != dimension_)
    fail(ErrorKind::InvalidArgument, "row " + id + " has the wrong dimension");
  ids_.push_back(std::move(id));
  data_.insert(data_.end(), values.begin(), values.end());
  token_counts_.push_back(token_count);
}

std::vector<std::string> EmbeddingMatrix::degenerate_ids() const {
  std::vector<std::string> out;
  for (std::size_t r = 0; r < rows(); ++r)
    if (degenerate(r)) out.push_back(ids_[r]);
  return out;
}

std::size_t EmbeddingMatrix::row_index(std::string_view id) const {
  for (std::size_t r = 0; r < ids_.size(); ++r)
    if (ids_[r] == id) return r;
  fail(ErrorKind::NotFound, "no embedding for entry " + std::string(id));
}

EmbeddingMatrix EmbeddingMatrix::subset(std::span<const std::string> keep) const {
  const std::unordered_set<std::string> wanted(keep.begin(), keep.end());
  EmbeddingMatrix out(dimension_);
  for (std::size_t r = 0; r < rows(); ++r)
    if (wanted.contains(ids_[r])) out.add_row(ids_[r], row(r), token_counts_[r]);
  out.removed_ = removed_;
  return out;
}

// ---------------------------------------------------------------------------
// Principal-component removal

PrincipalDirections principal_directions(const EmbeddingMatrix& matrix, std::size_t k) {
  const std::size_t d = matrix.dimension();
  std::vector<double> gram(d * d, 0.0);
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    const auto v = matrix.row(r);
    for (std::size_t i = 0; i < d; ++i) {
      const double vi = v[i];
      if (vi == 0.0) continue;
      double* g = gram.data() + i * d;
      for (std::size_t j = i; j < d; ++j) g[j] += vi * v[j];
    }
  }
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < i; ++j) gram[i * d + j] = gram[j * d + i];

  PrincipalDirections out;
  auto eig = symmetric_eigen(gram, d);
  // Gram eigenvalues carry absolute error ~ eps * lambda_max.
  const double lambda_max = eig.values.empty() ? 0.0 : eig.values[0];
  for (double lambda : eig.values)
    if (lambda_max > 0 && lambda > lambda_max * 1e-12) ++out.rank;
  if (k > out.rank)
    fail(ErrorKind::InvalidArgument, "cannot remove " + std::to_string(k) +
                                         " principal components from a matrix of rank " +
                                         std::to_string(out.rank));
  for (std::size_t i = 0; i < k; ++i) {
    auto u = std::move(eig.vectors[i]);
    for (double x : u) {
      if (std::abs(x) > 1e-12) {
        if (x < 0)
          for (double& y : u) y = -y;
        break;
      }
    }
    out.directions.push_back(std::move(u));
    out.singular_values.push_back(std::sqrt(std::max(eig.values[i], 0.0)));
  }
  return out;
}

EmbeddingMatrix project_out(EmbeddingMatrix matrix, std::vector<std::vector<double>> directions) {
  for (const auto& u : directions)
    if (u.size() != matrix.dimension())
      fail(ErrorKind::InvalidArgument, "direction has the wrong dimension");
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    auto v = matrix.row(r);
    std::vector<double> coeff(directions.size());
    for (std::size_t k = 0; k < directions.size(); ++k) coeff[k] = dot(directions[k], v);
    for (std::size_t k = 0; k < directions.size(); ++k)
      for (std::size_t i = 0; i < v.size(); ++i) v[i] -= coeff[k] * directions[k][i];
  }
  matrix.set_removed_components(std::move(directions));
  return matrix;
}

EmbeddingMatrix remove_top_components(EmbeddingMatrix matrix, int d_pcr) {
  if (d_pcr < 0) fail(ErrorKind::InvalidArgument, "d_pcr must be non-negative");
  if (d_pcr == 0) {
    matrix.set_removed_components({});
    return matrix;
  }
  auto pcs = principal_directions(matrix, static_cast<std::size_t>(d_pcr));
  return project_out(std::move(matrix), std::move(pcs.directions));
}

double cosine(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) fail(ErrorKind::InvalidArgument, "cosine of vectors of unequal length");
  const double nx = norm(x);
  const double ny = norm(y);
  if (nx == 0.0 || ny == 0.0) fail(ErrorKind::Undefined, "cosine similarity with a zero vector");
  const double c = dot(x, y) / (nx * ny);
  return std::clamp(c, -1.0, 1.0);
}

// ---------------------------------------------------------------------------
// Corpus pipeline

EmbeddingMatrix weighted_matrix(const EntryCorpus& corpus, const WordVectorStore& store,
                                const EmbeddingConfig& config) {
  validate(config);
  EmbeddingMatrix matrix(store.dimension());
  for (const auto& entry : corpus.entries()) {
    const auto bag = entry_token_bag(entry, config.token_input, config.drop_stopwords);
    auto emb = weighted_average_embedding(bag, store, config.probabilities, config.a);
    emb.entry_id = entry.id;
    matrix.add_row(emb);
  }
  return matrix;
}

EmbeddingMatrix embed_corpus(const EntryCorpus& corpus, const WordVectorStore& store,
                             const EmbeddingConfig& config) {
  return remove_top_components(weighted_matrix(corpus, store, config), config.d_pcr);
}

void write_embedding_matrix(const EmbeddingMatrix& matrix, std::ostream& out) {
  char buf[64];
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    out << matrix.id(r);
    for (double x : matrix.row(r)) {
      auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
      out << ' ' << std::string_view(buf, static_cast<std::size_t>(end - buf));
    }
    out << '\n';
  }
}

}  // namespace termharm
