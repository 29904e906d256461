#include "propsearch/ranker.hpp"

#include <algorithm>
#include <unordered_set>

#include "propsearch/errors.hpp"

namespace propsearch {

namespace {

struct Candidate {
  double score;
  std::size_t pos;  // index positions are in id order, so pos breaks ties
};

bool candidate_before(const Candidate& a, const Candidate& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.pos < b.pos;
}

bool equals_ignore_ascii_case(std::string_view lowered, std::string_view raw) {
  raw = trim(raw);
  if (lowered.size() != raw.size()) return false;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    char c = raw[i];
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    if (c != lowered[i]) return false;
  }
  return true;
}

void check_dims(const PropertyIndex& index, const EmbeddingModel& model) {
  if (index.dim() != model.dim()) {
    throw DimensionError("index has " + std::to_string(index.dim()) + " dimensions but model has " +
                         std::to_string(model.dim()));
  }
}

std::vector<std::size_t> all_positions(const PropertyIndex& index) {
  std::vector<std::size_t> out(index.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = i;
  return out;
}

std::vector<Candidate> score_candidates(const PropertyIndex& index, VectorView query,
                                        std::span<const std::size_t> candidates) {
  const double qnorm = norm(query);
  std::vector<Candidate> scored;
  scored.reserve(candidates.size());
  for (std::size_t pos : candidates) {
    if (auto s = semantic_score(index, pos, query, qnorm)) scored.push_back({*s, pos});
  }
  return scored;
}

}  // namespace

std::string_view tier_name(MatchTier tier) {
  switch (tier) {
    case MatchTier::kLabelExact:
      return "label_exact";
    case MatchTier::kAliasExact:
      return "alias_exact";
    case MatchTier::kSemantic:
      return "semantic";
  }
  return "semantic";
}

std::vector<std::size_t> resolve_scope(const PropertyIndex& index, const CandidateScope& scope) {
  if (!scope) return all_positions(index);
  if (scope->empty()) throw ScopeError("candidate scope is empty");
  std::vector<std::size_t> positions;
  positions.reserve(scope->size());
  std::string unknown;
  for (const auto& id : *scope) {
    if (auto pos = index.position_of(id)) {
      positions.push_back(*pos);
    } else {
      unknown += (unknown.empty() ? "" : ",") + id;
    }
  }
  if (!unknown.empty()) throw ScopeError("unknown property ids in scope: " + unknown);
  std::sort(positions.begin(), positions.end());
  positions.erase(std::unique(positions.begin(), positions.end()), positions.end());
  return positions;
}

std::optional<WordVector> query_vector(const EmbeddingModel& model, std::string_view query,
                                       const StopwordSet& stopwords) {
  return phrase_vector(model, tokenize(query, stopwords));
}

std::optional<double> semantic_score(const PropertyIndex& index, std::size_t pos, VectorView query,
                                     double query_norm) {
  const auto& entry = index.entries()[pos];
  if (!entry.vector) return std::nullopt;
  const double denom = query_norm * index.vector_norm(pos);
  if (denom == 0.0) return 0.0;
  return dot(query, *entry.vector) / denom;
}

bool ranks_before(double score_a, std::string_view id_a, double score_b, std::string_view id_b) {
  if (score_a != score_b) return score_a > score_b;
  return property_id_less(id_a, id_b);
}

std::vector<ScoredProperty> rank_semantic(const PropertyIndex& index, VectorView query,
                                          std::span<const std::size_t> candidates) {
  if (query.size() != index.dim()) {
    throw DimensionError("query vector has " + std::to_string(query.size()) +
                         " components, index has " + std::to_string(index.dim()));
  }
  auto scored = score_candidates(index, query, candidates);
  std::sort(scored.begin(), scored.end(), candidate_before);
  std::vector<ScoredProperty> out;
  out.reserve(scored.size());
  for (const auto& c : scored) out.push_back({index.entries()[c.pos].id, c.score});
  return out;
}

std::vector<ScoredProperty> rank_semantic(const PropertyIndex& index, const EmbeddingModel& model,
                                          std::string_view query, const CandidateScope& scope,
                                          const StopwordSet& stopwords) {
  check_dims(index, model);
  const auto candidates = resolve_scope(index, scope);
  auto qv = query_vector(model, query, stopwords);
  if (!qv) return {};
  return rank_semantic(index, *qv, candidates);
}

std::vector<RankedMatch> search(const PropertyIndex& index, const EmbeddingModel& model,
                                std::string_view query, const CandidateScope& scope,
                                std::size_t limit, const StopwordSet& stopwords) {
  if (limit == 0) throw ArgumentError("limit must be at least 1");
  check_dims(index, model);
  const auto candidates = resolve_scope(index, scope);
  const std::string needle = to_lower(trim(query));

  std::vector<RankedMatch> out;
  std::unordered_set<std::size_t> taken;
  auto emit = [&](std::size_t pos, MatchTier tier, double score) {
    const auto& e = index.entries()[pos];
    out.push_back({e.id, e.label, tier, score, out.size() + 1});
    taken.insert(pos);
  };

  if (!needle.empty()) {
    for (std::size_t pos : candidates) {
      if (out.size() >= limit) break;
      if (equals_ignore_ascii_case(needle, index.entries()[pos].label)) {
        emit(pos, MatchTier::kLabelExact, 1.0);
      }
    }
    for (std::size_t pos : candidates) {
      if (out.size() >= limit) break;
      if (taken.contains(pos)) continue;
      const auto& aliases = index.entries()[pos].aliases;
      if (std::any_of(aliases.begin(), aliases.end(),
                      [&](const std::string& a) { return equals_ignore_ascii_case(needle, a); })) {
        emit(pos, MatchTier::kAliasExact, 1.0);
      }
    }
  }
  if (out.size() >= limit) return out;

  auto qv = query_vector(model, query, stopwords);
  if (!qv) return out;
  auto scored = score_candidates(index, *qv, candidates);
  std::erase_if(scored, [&](const Candidate& c) { return taken.contains(c.pos); });
  const std::size_t want = std::min(limit - out.size(), scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(want), scored.end(),
                    candidate_before);
  for (std::size_t i = 0; i < want; ++i) emit(scored[i].pos, MatchTier::kSemantic, scored[i].score);
  return out;
}

}  // namespace propsearch
