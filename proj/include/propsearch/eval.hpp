#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "propsearch/embeddings.hpp"
#include "propsearch/index.hpp"
#include "propsearch/ingest.hpp"
#include "propsearch/ranker.hpp"

namespace propsearch {

/// An alias used as a query, and the property that owns it.
struct GoldInstance {
  std::string alias;
  std::string target_property;
  std::optional<std::string> entity_scope;  // set for entity-restricted runs

  friend bool operator==(const GoldInstance&, const GoldInstance&) = default;
};

enum class ScopeMode { kFull, kPerEntity };

std::string_view scope_mode_name(ScopeMode mode);

/// One instance per (alias, owning property), in property id order and then
/// alias order. Label-identical aliases are kept unless
/// `include_label_duplicates` is false.
std::vector<GoldInstance> build_gold(std::span<const PropertyRecord> properties,
                                     bool include_label_duplicates = true);

/// 1-based rank of the target among `candidates` (index positions), using
/// the same ordering as rank_semantic. nullopt when the query or the target
/// has no vector. Throws ScopeError when the target is not a candidate.
std::optional<std::size_t> rank_of_target(const PropertyIndex& index, const EmbeddingModel& model,
                                          const GoldInstance& instance,
                                          std::span<const std::size_t> candidates,
                                          const StopwordSet& stopwords);

std::optional<std::size_t> rank_of_target(const PropertyIndex& index, const EmbeddingModel& model,
                                          const GoldInstance& instance, const CandidateScope& scope,
                                          const StopwordSet& stopwords);

struct RankMetrics {
  std::size_t instance_count = 0;
  std::size_t unresolvable_count = 0;
  double top1 = 0.0;
  double top3 = 0.0;
  double top10 = 0.0;
  double mrr = 0.0;  // unresolved instances contribute 0
};

/// Top-N ratios and MRR over a list of ranks (nullopt = unresolved).
/// Throws ArgumentError on an empty list or a zero rank.
RankMetrics summarize_ranks(std::span<const std::optional<std::size_t>> ranks);

struct EvalConfig {
  std::string model_id;
  std::optional<std::size_t> vocab_cap;
  std::size_t dim = 0;
  bool use_description = false;
  ScopeMode scope = ScopeMode::kFull;
  std::optional<std::uint64_t> seed;
};

struct EvalReport {
  RankMetrics metrics;
  EvalConfig config;
  std::vector<std::string> sampled_entities;  // entity runs only, in sample order
  // Entity runs: share of listed properties with at least one alias, and
  // the mean alias count over those properties.
  std::optional<double> alias_coverage;
  std::optional<double> mean_aliases;
};

struct EvalOptions {
  unsigned workers = 0;  // 0 = hardware concurrency
};

/// Ranks every gold instance and aggregates. In kPerEntity mode each
/// instance is ranked among its entity's properties (`entities` required).
/// The result does not depend on the number of workers.
EvalReport evaluate(const PropertyIndex& index, const EmbeddingModel& model,
                    std::span<const GoldInstance> gold, ScopeMode mode,
                    const StopwordSet& stopwords, const EntityPropertyMap* entities = nullptr,
                    const EvalOptions& options = {});

/// Per-instance ranks (same order as `gold`), used by evaluate.
std::vector<std::optional<std::size_t>> rank_gold(const PropertyIndex& index,
                                                  const EmbeddingModel& model,
                                                  std::span<const GoldInstance> gold, ScopeMode mode,
                                                  const StopwordSet& stopwords,
                                                  const EntityPropertyMap* entities = nullptr,
                                                  const EvalOptions& options = {});

/// Draws `sample_size` distinct entity ids, uniformly and without
/// replacement, from the map (taken in entity id order).
///
/// Algorithm: std::mt19937_64 seeded with `seed`; partial Fisher-Yates
/// shuffle where step i swaps position i with i + r, r drawn from
/// [0, n - i) by rejection sampling (reject raw draws below
/// (2^64 - bound) mod bound, then take draw mod bound).
std::vector<std::string> sample_entities(const EntityPropertyMap& entities,
                                         std::size_t sample_size, std::uint64_t seed);

/// Gold instances for the sampled entities: every alias of every property
/// of each entity, scoped to that entity.
std::vector<GoldInstance> entity_gold(const EntityPropertyMap& entities,
                                      std::span<const std::string> sampled,
                                      std::span<const PropertyRecord> properties);

/// Entity-restricted evaluation over a seeded random sample of entities.
EvalReport entity_simulation(const PropertyIndex& index, const EmbeddingModel& model,
                             const EntityPropertyMap& entities,
                             std::span<const PropertyRecord> properties, std::size_t sample_size,
                             std::uint64_t seed, const StopwordSet& stopwords,
                             const EvalOptions& options = {});

/// Key/value text report. Contains no timestamps, so equal reports are
/// byte-identical.
void write_report(const EvalReport& report, std::ostream& sink);

/// One JSON object per line with the columns model, vocab_cap, dim,
/// use_description, top1, top3, top10, mrr (plus scope and counts).
void write_report_row(const EvalReport& report, std::ostream& sink);

enum class AuditFlag { kOk, kDuplicateOfLabel, kLowSimilarity };

std::string_view audit_flag_name(AuditFlag flag);

struct AliasAuditRow {
  std::string property_id;
  std::string alias;
  double similarity = 0.0;  // 0 when either vector is absent
  AuditFlag flag = AuditFlag::kOk;
};

inline constexpr double kDefaultAuditThreshold = 0.2;

/// Scores every alias against its own property vector. Aliases equal to the
/// label (case-insensitive) are flagged first; otherwise similarity below
/// `threshold` is flagged as low.
std::vector<AliasAuditRow> audit_aliases(const PropertyIndex& index, const EmbeddingModel& model,
                                         const StopwordSet& stopwords,
                                         double threshold = kDefaultAuditThreshold);

/// TSV: property_id, alias, similarity, flag.
void write_audit(std::span<const AliasAuditRow> rows, std::ostream& sink);

}  // namespace propsearch
