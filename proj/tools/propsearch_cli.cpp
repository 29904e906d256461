// propsearch: build property indices, query them, run the alias evaluation
// and serve the JSON ranking API.

#include <cstdio>
#include <csignal>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "propsearch/embeddings.hpp"
#include "propsearch/errors.hpp"
#include "propsearch/eval.hpp"
#include "propsearch/index.hpp"
#include "propsearch/ingest.hpp"
#include "propsearch/ranker.hpp"
#include "propsearch/service.hpp"

namespace ps = propsearch;

namespace {

ps::StopwordSet stopwords_from(const std::string& path) {
  return path.empty() ? ps::default_stopwords() : ps::load_stopwords_file(path);
}

std::optional<std::size_t> cap_from(std::size_t max_words) {
  return max_words ? std::optional<std::size_t>(max_words) : std::nullopt;
}

std::string fixed6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

// Property ids separated by commas, whitespace or newlines.
std::vector<std::string> read_id_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ps::IoError("cannot open scope file '" + path + "'");
  std::vector<std::string> ids;
  std::string token;
  char c;
  auto flush = [&] {
    if (!token.empty()) ids.push_back(token);
    token.clear();
  };
  while (in.get(c)) {
    if (c == ',' || std::isspace(static_cast<unsigned char>(c))) {
      flush();
    } else {
      token += c;
    }
  }
  flush();
  return ids;
}

void write_to(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ps::IoError("cannot open '" + path + "' for writing");
  out << content;
}

struct BuildArgs {
  std::string model, properties, format, stopwords, output, export_path;
  std::size_t max_words = 0;
  std::size_t dims_check = 0;
  bool use_description = false;
  std::int64_t built_at = -1;
};

int run_build(const BuildArgs& a) {
  auto model = ps::load_model_file(a.model, cap_from(a.max_words));
  if (a.dims_check && model.dim() != a.dims_check) {
    throw ps::DimensionError("model has " + std::to_string(model.dim()) + " dimensions, expected " +
                             std::to_string(a.dims_check));
  }
  std::optional<ps::PropertyFormat> format;
  if (a.format == "json") format = ps::PropertyFormat::kJsonLines;
  if (a.format == "tsv") format = ps::PropertyFormat::kTsv;
  ps::ParseReport parsed;
  auto properties = ps::parse_properties_file(a.properties, format, &parsed);
  ps::BuildReport built;
  auto index = ps::build_index(model, properties, a.use_description, stopwords_from(a.stopwords),
                               a.built_at >= 0 ? std::optional(a.built_at) : std::nullopt, &built);
  std::ofstream out(a.output, std::ios::binary | std::ios::trunc);
  if (!out) throw ps::IoError("cannot open '" + a.output + "' for writing");
  const std::size_t bytes = ps::save_index(index, out);
  if (!a.export_path.empty()) {
    std::ostringstream text;
    ps::export_index_text(index, text);
    write_to(a.export_path, text.str());
  }
  std::cout << "model: " << model.model_id() << " (" << model.size() << " words, dim "
            << model.dim() << ")\n"
            << "properties: " << built.properties << " indexed, " << built.oov_properties
            << " without vector, " << parsed.skipped_missing_label << " skipped without label\n"
            << "use_description: " << (a.use_description ? "true" : "false") << '\n'
            << "wrote " << bytes << " bytes to " << a.output << '\n';
  return 0;
}

struct QueryArgs {
  std::string index, model, query, scope_file, stopwords;
  std::size_t max_words = 0;
  std::size_t limit = 10;
  bool json = false;
};

int run_query(const QueryArgs& a) {
  const auto index = ps::load_index_file(a.index);
  const auto model = ps::load_model_file(a.model, cap_from(a.max_words));
  ps::CandidateScope scope;
  if (!a.scope_file.empty()) scope = read_id_list(a.scope_file);
  const auto matches =
      ps::search(index, model, a.query, scope, a.limit, stopwords_from(a.stopwords));
  if (a.json) {
    nlohmann::ordered_json results = nlohmann::ordered_json::array();
    for (const auto& m : matches) {
      results.push_back({{"property_id", m.property_id},
                         {"label", m.label},
                         {"tier", ps::tier_name(m.tier)},
                         {"score", m.score},
                         {"rank", m.rank}});
    }
    std::cout << nlohmann::ordered_json{{"results", results}}.dump() << '\n';
    return 0;
  }
  for (const auto& m : matches) {
    std::cout << m.rank << '\t' << m.property_id << '\t' << ps::tier_name(m.tier) << '\t'
              << fixed6(m.score) << '\t' << m.label << '\n';
  }
  return 0;
}

struct EvalArgs {
  std::vector<std::string> indices, models;
  std::string properties, scope = "full", entity_map, report, rows, stopwords;
  std::size_t max_words = 0;
  std::size_t sample = 0;
  std::uint64_t seed = 1;
  unsigned workers = 0;
  bool exclude_label_duplicates = false;
};

int run_eval(const EvalArgs& a) {
  if (a.models.size() != 1 && a.models.size() != a.indices.size()) {
    throw ps::ArgumentError("give one --model, or one per --index");
  }
  const auto properties = ps::parse_properties_file(a.properties);
  const auto stopwords = stopwords_from(a.stopwords);
  const ps::EvalOptions options{a.workers};

  std::optional<ps::EntityPropertyMap> entities;
  if (a.scope == "per-entity") {
    if (a.entity_map.empty()) throw ps::ArgumentError("--scope per-entity needs --entity-map");
    entities = ps::parse_entity_map_file(a.entity_map, &properties);
  }

  std::ostringstream report_text;
  std::ostringstream rows_text;
  std::optional<ps::EmbeddingModel> shared_model;
  for (std::size_t i = 0; i < a.indices.size(); ++i) {
    const auto index = ps::load_index_file(a.indices[i]);
    ps::EmbeddingModel own_model;
    const ps::EmbeddingModel* model = nullptr;
    if (a.models.size() == 1) {
      if (!shared_model) shared_model = ps::load_model_file(a.models[0], cap_from(a.max_words));
      model = &*shared_model;
    } else {
      own_model = ps::load_model_file(a.models[i], cap_from(a.max_words));
      model = &own_model;
    }

    ps::EvalReport report;
    if (entities) {
      const std::size_t sample = a.sample ? a.sample : entities->size();
      report = ps::entity_simulation(index, *model, *entities, properties, sample, a.seed,
                                     stopwords, options);
    } else {
      const auto gold = ps::build_gold(properties, !a.exclude_label_duplicates);
      report = ps::evaluate(index, *model, gold, ps::ScopeMode::kFull, stopwords, nullptr, options);
    }
    if (i) report_text << "---\n";
    report_text << "index: " << a.indices[i] << '\n';
    ps::write_report(report, report_text);
    ps::write_report_row(report, rows_text);
  }
  std::cout << report_text.str();
  if (!a.report.empty()) write_to(a.report, report_text.str());
  if (!a.rows.empty()) write_to(a.rows, rows_text.str());
  return 0;
}

struct AuditArgs {
  std::string index, model, output, stopwords;
  std::size_t max_words = 0;
  double threshold = ps::kDefaultAuditThreshold;
};

int run_audit(const AuditArgs& a) {
  const auto index = ps::load_index_file(a.index);
  const auto model = ps::load_model_file(a.model, cap_from(a.max_words));
  const auto rows = ps::audit_aliases(index, model, stopwords_from(a.stopwords), a.threshold);
  std::ostringstream text;
  ps::write_audit(rows, text);
  if (a.output.empty()) {
    std::cout << text.str();
  } else {
    write_to(a.output, text.str());
  }
  std::size_t duplicates = 0, low = 0;
  for (const auto& r : rows) {
    duplicates += r.flag == ps::AuditFlag::kDuplicateOfLabel;
    low += r.flag == ps::AuditFlag::kLowSimilarity;
  }
  std::cerr << "aliases: " << rows.size() << ", duplicate_of_label: " << duplicates
            << ", low_similarity: " << low << '\n';
  return 0;
}

struct ServeArgs {
  std::string host = "0.0.0.0", index, model, stopwords, allow_origin = "*";
  int port = 8080;
  std::size_t max_words = 0;
};

ps::HttpServer* g_server = nullptr;

extern "C" void handle_signal(int) {
  if (g_server) g_server->stop();
}

int run_serve(const ServeArgs& a) {
  auto index = std::make_shared<const ps::PropertyIndex>(ps::load_index_file(a.index));
  auto model = std::make_shared<const ps::EmbeddingModel>(
      ps::load_model_file(a.model, cap_from(a.max_words)));
  ps::ServiceConfig config;
  config.allow_origin = a.allow_origin;
  config.stopwords = stopwords_from(a.stopwords);
  config.log = &std::cout;
  ps::RankService service(index, model, std::move(config));
  ps::HttpServer server(service);
  const int port = server.bind(a.host, a.port);
  std::cerr << "serving " << index->size() << " properties on " << a.host << ':' << port << '\n';
  g_server = &server;
  std::signal(SIGINT, handle_signal);
  std::signal(SIGTERM, handle_signal);
  server.listen();
  g_server = nullptr;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semantic search over Wikidata property metadata"};
  app.require_subcommand(1);

  BuildArgs build;
  auto* b = app.add_subcommand("build-index", "Embed property labels (and descriptions) and persist the index");
  b->add_option("--model", build.model, "Word vectors (word2vec or GloVe text)")->required();
  b->add_option("--properties", build.properties, "Property snapshot (.jsonl or .tsv)")->required();
  b->add_option("--format", build.format, "Override property format")->check(CLI::IsMember({"json", "tsv"}));
  b->add_option("--max-words", build.max_words, "Keep only the first N model words");
  b->add_option("--dims-check", build.dims_check, "Fail unless the model has this many dimensions");
  b->add_flag("--use-description", build.use_description, "Add description words to property vectors");
  b->add_option("--stopwords", build.stopwords, "Stopword file (default: bundled list)");
  b->add_option("--built-at", build.built_at, "Timestamp to record (unix seconds; default now)");
  b->add_option("--export", build.export_path, "Also write a human-readable dump");
  b->add_option("-o,--output", build.output, "Index file to write")->required();

  QueryArgs query;
  auto* q = app.add_subcommand("query", "Rank properties for a free-text query");
  q->add_option("--index", query.index)->required();
  q->add_option("--model", query.model)->required();
  q->add_option("--max-words", query.max_words);
  q->add_option("--limit", query.limit)->check(CLI::PositiveNumber);
  q->add_option("--entity-scope", query.scope_file, "File with the property ids to rank within");
  q->add_option("--stopwords", query.stopwords);
  q->add_flag("--json", query.json, "Print JSON instead of TSV");
  q->add_option("query", query.query, "Query text")->required();

  EvalArgs eval;
  auto* e = app.add_subcommand("eval", "Alias gold-standard evaluation (Top-1/3/10, MRR)");
  e->add_option("--index", eval.indices, "Index file(s)")->required();
  e->add_option("--model", eval.models, "Model file (one, or one per index)")->required();
  e->add_option("--max-words", eval.max_words);
  e->add_option("--properties", eval.properties, "Property snapshot supplying the aliases")->required();
  e->add_flag("--exclude-label-duplicates", eval.exclude_label_duplicates,
              "Drop aliases identical to their label from the gold standard");
  e->add_option("--scope", eval.scope)->check(CLI::IsMember({"full", "per-entity"}));
  e->add_option("--entity-map", eval.entity_map, "Entity to property map (per-entity scope)");
  e->add_option("--sample", eval.sample, "Number of entities to sample (default: all)");
  e->add_option("--seed", eval.seed, "Sampling seed");
  e->add_option("--workers", eval.workers, "Worker threads (default: hardware)");
  e->add_option("--stopwords", eval.stopwords);
  e->add_option("--report", eval.report, "Write the text report here too");
  e->add_option("--rows", eval.rows, "Write one JSON row per configuration here");

  AuditArgs audit;
  auto* au = app.add_subcommand("audit", "Flag questionable aliases");
  au->add_option("--index", audit.index)->required();
  au->add_option("--model", audit.model)->required();
  au->add_option("--max-words", audit.max_words);
  au->add_option("--threshold", audit.threshold, "Low-similarity threshold");
  au->add_option("--stopwords", audit.stopwords);
  au->add_option("-o,--output", audit.output, "TSV output (default: stdout)");

  ServeArgs serve;
  auto* s = app.add_subcommand("serve", "Serve the /v1 JSON API");
  s->add_option("--host", serve.host)->envname("PROPSEARCH_HOST");
  s->add_option("--port", serve.port)->envname("PROPSEARCH_PORT");
  s->add_option("--index", serve.index)->envname("PROPSEARCH_INDEX")->required();
  s->add_option("--model", serve.model)->envname("PROPSEARCH_MODEL")->required();
  s->add_option("--max-words", serve.max_words)->envname("PROPSEARCH_MAX_WORDS");
  s->add_option("--stopwords", serve.stopwords)->envname("PROPSEARCH_STOPWORDS");
  s->add_option("--allow-origin", serve.allow_origin)->envname("PROPSEARCH_ALLOW_ORIGIN");

  std::string export_index;
  auto* x = app.add_subcommand("export-index", "Dump an index as text");
  x->add_option("index", export_index)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& ex) {
    if (ex.get_exit_code() == 0) return app.exit(ex);
    std::cerr << "error: usage_error: " << ex.what() << '\n';
    return 2;
  }

  try {
    if (*b) return run_build(build);
    if (*q) return run_query(query);
    if (*e) return run_eval(eval);
    if (*au) return run_audit(audit);
    if (*s) return run_serve(serve);
    if (*x) {
      ps::export_index_text(ps::load_index_file(export_index), std::cout);
      return 0;
    }
  } catch (const ps::Error& ex) {
    std::cerr << "error: " << ex.kind() << ": " << ex.what() << '\n';
    return 1;
  } catch (const std::exception& ex) {
    std::cerr << "error: internal_error: " << ex.what() << '\n';
    return 1;
  }
  return 0;
}
