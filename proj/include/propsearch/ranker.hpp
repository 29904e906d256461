#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "propsearch/embeddings.hpp"
#include "propsearch/index.hpp"
#include "propsearch/ingest.hpp"

namespace propsearch {

enum class MatchTier { kLabelExact, kAliasExact, kSemantic };

std::string_view tier_name(MatchTier tier);

struct RankedMatch {
  std::string property_id;
  std::string label;
  MatchTier tier = MatchTier::kSemantic;
  double score = 0.0;  // cosine for semantic matches, 1.0 for exact tiers
  std::size_t rank = 0;  // 1-based
};

struct ScoredProperty {
  std::string property_id;
  double score = 0.0;
};

/// Restricts ranking to a subset of the index. An empty optional means the
/// whole index.
using CandidateScope = std::optional<std::vector<std::string>>;

/// Index positions covered by `scope`, ascending. Throws ScopeError when the
/// scope is empty or names ids that are not in the index.
std::vector<std::size_t> resolve_scope(const PropertyIndex& index, const CandidateScope& scope);

/// Query vector for free text: tokenize, then sum word vectors.
std::optional<WordVector> query_vector(const EmbeddingModel& model, std::string_view query,
                                       const StopwordSet& stopwords);

/// Cosine between `query` (norm precomputed) and index entry `pos`, or
/// nullopt when the entry has no vector.
std::optional<double> semantic_score(const PropertyIndex& index, std::size_t pos, VectorView query,
                                     double query_norm);

/// True when (score_a, id_a) ranks ahead of (score_b, id_b): higher score
/// first, property id ascending on ties.
bool ranks_before(double score_a, std::string_view id_a, double score_b, std::string_view id_b);

/// Every in-scope property with a vector, ordered by descending cosine to
/// the query. Empty when the query has no in-vocabulary token.
std::vector<ScoredProperty> rank_semantic(const PropertyIndex& index, const EmbeddingModel& model,
                                          std::string_view query, const CandidateScope& scope,
                                          const StopwordSet& stopwords);

/// Same ranking, from an already computed query vector.
std::vector<ScoredProperty> rank_semantic(const PropertyIndex& index, VectorView query,
                                          std::span<const std::size_t> candidates);

/// Three-tier search: exact label matches, then exact alias matches, then
/// the semantic ranking of the remaining properties, truncated to `limit`.
std::vector<RankedMatch> search(const PropertyIndex& index, const EmbeddingModel& model,
                                std::string_view query, const CandidateScope& scope,
                                std::size_t limit, const StopwordSet& stopwords);

}  // namespace propsearch
