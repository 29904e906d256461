#include "propsearch/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <exception>
#include <map>
#include <ostream>
#include <random>
#include <thread>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "propsearch/errors.hpp"

namespace propsearch {

namespace {

std::string format_ratio(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

// Uniform draw from [0, bound) without modulo bias.
std::uint64_t bounded_draw(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t reject_below = (0 - bound) % bound;
  std::uint64_t r = 0;
  do {
    r = rng();
  } while (r < reject_below);
  return r % bound;
}

std::vector<std::size_t> entity_candidates(const PropertyIndex& index,
                                           const EntityPropertyMap& entities,
                                           const std::string& entity) {
  auto it = entities.find(entity);
  if (it == entities.end()) throw ArgumentError("unknown entity '" + entity + "'");
  return resolve_scope(index, std::vector<std::string>(it->second.begin(), it->second.end()));
}

}  // namespace

std::string_view scope_mode_name(ScopeMode mode) {
  return mode == ScopeMode::kFull ? "full" : "per_entity";
}

std::vector<GoldInstance> build_gold(std::span<const PropertyRecord> properties,
                                     bool include_label_duplicates) {
  std::vector<const PropertyRecord*> sorted;
  for (const auto& p : properties) sorted.push_back(&p);
  std::stable_sort(sorted.begin(), sorted.end(), [](const auto* a, const auto* b) {
    return property_id_less(a->id, b->id);
  });
  std::vector<GoldInstance> gold;
  for (const auto* p : sorted) {
    const std::string label = to_lower(trim(p->label));
    for (const auto& alias : p->aliases) {
      if (!include_label_duplicates && to_lower(trim(alias)) == label) continue;
      gold.push_back({alias, p->id, std::nullopt});
    }
  }
  return gold;
}

std::optional<std::size_t> rank_of_target(const PropertyIndex& index, const EmbeddingModel& model,
                                          const GoldInstance& instance,
                                          std::span<const std::size_t> candidates,
                                          const StopwordSet& stopwords) {
  const auto target = index.position_of(instance.target_property);
  if (!target || std::find(candidates.begin(), candidates.end(), *target) == candidates.end()) {
    throw ScopeError("target " + instance.target_property + " is not among the candidates");
  }
  if (index.dim() != model.dim()) throw DimensionError("index and model dimensions differ");
  const auto qv = query_vector(model, instance.alias, stopwords);
  if (!qv) return std::nullopt;
  const double qnorm = norm(*qv);
  const auto target_score = semantic_score(index, *target, *qv, qnorm);
  if (!target_score) return std::nullopt;

  const auto& target_id = index.entries()[*target].id;
  std::size_t ahead = 0;
  for (std::size_t pos : candidates) {
    if (pos == *target) continue;
    const auto s = semantic_score(index, pos, *qv, qnorm);
    if (s && ranks_before(*s, index.entries()[pos].id, *target_score, target_id)) ++ahead;
  }
  return ahead + 1;
}

std::optional<std::size_t> rank_of_target(const PropertyIndex& index, const EmbeddingModel& model,
                                          const GoldInstance& instance, const CandidateScope& scope,
                                          const StopwordSet& stopwords) {
  const auto candidates = resolve_scope(index, scope);
  return rank_of_target(index, model, instance, candidates, stopwords);
}

RankMetrics summarize_ranks(std::span<const std::optional<std::size_t>> ranks) {
  if (ranks.empty()) throw ArgumentError("cannot summarize an empty rank list");
  RankMetrics m;
  m.instance_count = ranks.size();
  std::size_t hit1 = 0, hit3 = 0, hit10 = 0;
  double reciprocal_sum = 0.0;
  for (const auto& r : ranks) {
    if (!r) {
      ++m.unresolvable_count;
      continue;
    }
    if (*r == 0) throw ArgumentError("ranks are 1-based");
    hit1 += *r <= 1;
    hit3 += *r <= 3;
    hit10 += *r <= 10;
    reciprocal_sum += 1.0 / static_cast<double>(*r);
  }
  const auto n = static_cast<double>(ranks.size());
  m.top1 = static_cast<double>(hit1) / n;
  m.top3 = static_cast<double>(hit3) / n;
  m.top10 = static_cast<double>(hit10) / n;
  m.mrr = reciprocal_sum / n;
  return m;
}

std::vector<std::optional<std::size_t>> rank_gold(const PropertyIndex& index,
                                                  const EmbeddingModel& model,
                                                  std::span<const GoldInstance> gold, ScopeMode mode,
                                                  const StopwordSet& stopwords,
                                                  const EntityPropertyMap* entities,
                                                  const EvalOptions& options) {
  if (mode == ScopeMode::kPerEntity && !entities) {
    throw ArgumentError("per-entity evaluation needs an entity map");
  }
  const std::vector<std::size_t> full = resolve_scope(index, std::nullopt);
  std::vector<std::optional<std::size_t>> ranks(gold.size());

  // Contiguous chunks; each slot is written by exactly one worker.
  auto work = [&](std::size_t begin, std::size_t end) {
    std::unordered_map<std::string, std::vector<std::size_t>> scope_cache;
    for (std::size_t i = begin; i < end; ++i) {
      const auto& g = gold[i];
      if (mode == ScopeMode::kFull) {
        ranks[i] = rank_of_target(index, model, g, full, stopwords);
        continue;
      }
      if (!g.entity_scope) throw ArgumentError("gold instance for '" + g.alias + "' has no entity");
      auto it = scope_cache.find(*g.entity_scope);
      if (it == scope_cache.end()) {
        it = scope_cache
                 .emplace(*g.entity_scope, entity_candidates(index, *entities, *g.entity_scope))
                 .first;
      }
      ranks[i] = rank_of_target(index, model, g, it->second, stopwords);
    }
  };

  unsigned workers = options.workers ? options.workers : std::thread::hardware_concurrency();
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(gold.size() / 64 + 1)));
  if (workers == 1) {
    work(0, gold.size());
    return ranks;
  }
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (gold.size() + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
      const std::size_t begin = std::min(gold.size(), w * chunk);
      const std::size_t end = std::min(gold.size(), begin + chunk);
      pool.emplace_back([&, w, begin, end] {
        try {
          work(begin, end);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return ranks;
}

EvalReport evaluate(const PropertyIndex& index, const EmbeddingModel& model,
                    std::span<const GoldInstance> gold, ScopeMode mode,
                    const StopwordSet& stopwords, const EntityPropertyMap* entities,
                    const EvalOptions& options) {
  if (gold.empty()) throw ArgumentError("gold standard is empty");
  const auto ranks = rank_gold(index, model, gold, mode, stopwords, entities, options);
  EvalReport report;
  report.metrics = summarize_ranks(ranks);
  report.config = {model.model_id(), model.vocab_cap(),     index.dim(),
                   index.use_description(), mode, std::nullopt};
  return report;
}

std::vector<std::string> sample_entities(const EntityPropertyMap& entities,
                                         std::size_t sample_size, std::uint64_t seed) {
  if (entities.empty()) throw ArgumentError("entity map is empty");
  if (sample_size > entities.size()) {
    throw ArgumentError("sample size " + std::to_string(sample_size) + " exceeds " +
                        std::to_string(entities.size()) + " entities");
  }
  std::vector<std::string> ids;
  ids.reserve(entities.size());
  for (const auto& [id, props] : entities) ids.push_back(id);

  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < sample_size; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(bounded_draw(rng, ids.size() - i));
    std::swap(ids[i], ids[j]);
  }
  ids.resize(sample_size);
  return ids;
}

std::vector<GoldInstance> entity_gold(const EntityPropertyMap& entities,
                                      std::span<const std::string> sampled,
                                      std::span<const PropertyRecord> properties) {
  std::unordered_map<std::string_view, const PropertyRecord*> by_id;
  for (const auto& p : properties) by_id.emplace(p.id, &p);
  std::vector<GoldInstance> gold;
  for (const auto& entity : sampled) {
    auto it = entities.find(entity);
    if (it == entities.end()) throw ArgumentError("unknown entity '" + entity + "'");
    for (const auto& pid : it->second) {
      auto rec = by_id.find(pid);
      if (rec == by_id.end()) throw ValidationError("entity " + entity + " uses unknown property " + pid);
      for (const auto& alias : rec->second->aliases) gold.push_back({alias, pid, entity});
    }
  }
  return gold;
}

EvalReport entity_simulation(const PropertyIndex& index, const EmbeddingModel& model,
                             const EntityPropertyMap& entities,
                             std::span<const PropertyRecord> properties, std::size_t sample_size,
                             std::uint64_t seed, const StopwordSet& stopwords,
                             const EvalOptions& options) {
  auto sampled = sample_entities(entities, sample_size, seed);
  const auto gold = entity_gold(entities, sampled, properties);
  if (gold.empty()) throw ArgumentError("sampled entities define no aliases");

  EvalReport report = evaluate(index, model, gold, ScopeMode::kPerEntity, stopwords, &entities, options);
  report.config.seed = seed;

  std::unordered_map<std::string_view, std::size_t> alias_counts;
  for (const auto& p : properties) alias_counts.emplace(p.id, p.aliases.size());
  std::size_t listed = 0, with_aliases = 0, alias_total = 0;
  for (const auto& entity : sampled) {
    for (const auto& pid : entities.at(entity)) {
      ++listed;
      const std::size_t n = alias_counts[pid];
      if (n > 0) {
        ++with_aliases;
        alias_total += n;
      }
    }
  }
  report.alias_coverage = listed ? static_cast<double>(with_aliases) / listed : 0.0;
  report.mean_aliases = with_aliases ? static_cast<double>(alias_total) / with_aliases : 0.0;
  report.sampled_entities = std::move(sampled);
  return report;
}

void write_report(const EvalReport& report, std::ostream& sink) {
  const auto& c = report.config;
  const auto& m = report.metrics;
  sink << "model_id: " << c.model_id << '\n'
       << "vocab_cap: " << (c.vocab_cap ? std::to_string(*c.vocab_cap) : "none") << '\n'
       << "dim: " << c.dim << '\n'
       << "use_description: " << (c.use_description ? "true" : "false") << '\n'
       << "scope: " << scope_mode_name(c.scope) << '\n'
       << "seed: " << (c.seed ? std::to_string(*c.seed) : "none") << '\n'
       << "instances: " << m.instance_count << '\n'
       << "unresolvable: " << m.unresolvable_count << '\n'
       << "top1: " << format_ratio(m.top1) << '\n'
       << "top3: " << format_ratio(m.top3) << '\n'
       << "top10: " << format_ratio(m.top10) << '\n'
       << "mrr: " << format_ratio(m.mrr) << '\n';
  if (report.alias_coverage) sink << "alias_coverage: " << format_ratio(*report.alias_coverage) << '\n';
  if (report.mean_aliases) sink << "mean_aliases: " << format_ratio(*report.mean_aliases) << '\n';
  if (!report.sampled_entities.empty()) {
    sink << "sampled_entities:";
    for (std::size_t i = 0; i < report.sampled_entities.size(); ++i) {
      sink << (i ? "," : " ") << report.sampled_entities[i];
    }
    sink << '\n';
  }
}

void write_report_row(const EvalReport& report, std::ostream& sink) {
  const auto& c = report.config;
  const auto& m = report.metrics;
  nlohmann::ordered_json row = {
      {"model", c.model_id},
      {"vocab_cap", c.vocab_cap ? nlohmann::ordered_json(*c.vocab_cap) : nlohmann::ordered_json(nullptr)},
      {"dim", c.dim},
      {"use_description", c.use_description},
      {"top1", m.top1},
      {"top3", m.top3},
      {"top10", m.top10},
      {"mrr", m.mrr},
      {"scope", scope_mode_name(c.scope)},
      {"instances", m.instance_count},
      {"unresolvable", m.unresolvable_count},
  };
  sink << row.dump() << '\n';
}

std::string_view audit_flag_name(AuditFlag flag) {
  switch (flag) {
    case AuditFlag::kOk:
      return "ok";
    case AuditFlag::kDuplicateOfLabel:
      return "duplicate_of_label";
    case AuditFlag::kLowSimilarity:
      return "low_similarity";
  }
  return "ok";
}

std::vector<AliasAuditRow> audit_aliases(const PropertyIndex& index, const EmbeddingModel& model,
                                         const StopwordSet& stopwords, double threshold) {
  if (index.dim() != model.dim()) throw DimensionError("index and model dimensions differ");
  std::vector<AliasAuditRow> rows;
  for (std::size_t pos = 0; pos < index.size(); ++pos) {
    const auto& e = index.entries()[pos];
    const std::string label = to_lower(trim(e.label));
    for (const auto& alias : e.aliases) {
      AliasAuditRow row{e.id, alias, 0.0, AuditFlag::kOk};
      if (const auto qv = query_vector(model, alias, stopwords)) {
        row.similarity = semantic_score(index, pos, *qv, norm(*qv)).value_or(0.0);
      }
      if (to_lower(trim(alias)) == label) {
        row.flag = AuditFlag::kDuplicateOfLabel;
      } else if (row.similarity < threshold) {
        row.flag = AuditFlag::kLowSimilarity;
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

void write_audit(std::span<const AliasAuditRow> rows, std::ostream& sink) {
  sink << "property_id\talias\tsimilarity\tflag\n";
  for (const auto& r : rows) {
    sink << r.property_id << '\t' << r.alias << '\t' << format_ratio(r.similarity) << '\t'
         << audit_flag_name(r.flag) << '\n';
  }
}

}  // namespace propsearch
