#include <pybind11/pybind11.h>
#include <pybind11/operators.h>
#include <pybind11/stl.h>

#include <fstream>
#include <sstream>

#include "propsearch/embeddings.hpp"
#include "propsearch/errors.hpp"
#include "propsearch/eval.hpp"
#include "propsearch/index.hpp"
#include "propsearch/ingest.hpp"
#include "propsearch/ranker.hpp"
#include "propsearch/service.hpp"

namespace py = pybind11;
namespace ps = propsearch;

namespace {

using ModelPtr = std::shared_ptr<ps::EmbeddingModel>;
using IndexPtr = std::shared_ptr<ps::PropertyIndex>;

const ps::StopwordSet& stopwords_or_default(const std::optional<ps::StopwordSet>& s) {
  return s ? *s : ps::default_stopwords();
}

ps::PropertyFormat format_from(const std::string& name) {
  if (name == "json" || name == "jsonl") return ps::PropertyFormat::kJsonLines;
  if (name == "tsv") return ps::PropertyFormat::kTsv;
  throw ps::ArgumentError("unknown property format '" + name + "'");
}

ps::ScopeMode scope_from(const std::string& name) {
  if (name == "full") return ps::ScopeMode::kFull;
  if (name == "per-entity" || name == "per_entity") return ps::ScopeMode::kPerEntity;
  throw ps::ArgumentError("unknown scope '" + name + "'");
}

ps::EntityPropertyMap to_entity_map(const std::map<std::string, std::vector<std::string>>& in) {
  ps::EntityPropertyMap out;
  for (const auto& [entity, props] : in) out[entity].insert(props.begin(), props.end());
  return out;
}

std::map<std::string, std::vector<std::string>> from_entity_map(const ps::EntityPropertyMap& in) {
  std::map<std::string, std::vector<std::string>> out;
  for (const auto& [entity, props] : in) out[entity].assign(props.begin(), props.end());
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Semantic search over Wikidata property metadata";

  auto base = py::register_exception<ps::Error>(m, "Error", PyExc_ValueError);
  py::register_exception<ps::FormatError>(m, "FormatError", base.ptr());
  py::register_exception<ps::EmptyModelError>(m, "EmptyModelError", base.ptr());
  py::register_exception<ps::DimensionError>(m, "DimensionError", base.ptr());
  py::register_exception<ps::ParseError>(m, "ParseError", base.ptr());
  py::register_exception<ps::ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<ps::BuildError>(m, "BuildError", base.ptr());
  py::register_exception<ps::CorruptionError>(m, "CorruptionError", base.ptr());
  py::register_exception<ps::ScopeError>(m, "ScopeError", base.ptr());
  py::register_exception<ps::ArgumentError>(m, "ArgumentError", base.ptr());
  py::register_exception<ps::IoError>(m, "IoError", base.ptr());

  // embeddings
  py::class_<ps::EmbeddingModel, ModelPtr>(m, "EmbeddingModel")
      .def_property_readonly("model_id", &ps::EmbeddingModel::model_id)
      .def_property_readonly("dim", &ps::EmbeddingModel::dim)
      .def_property_readonly("vocab_cap", &ps::EmbeddingModel::vocab_cap)
      .def_property_readonly("duplicates_skipped", &ps::EmbeddingModel::duplicates_skipped)
      .def("__len__", &ps::EmbeddingModel::size)
      .def("__contains__", [](const ps::EmbeddingModel& mdl, const std::string& w) {
        return mdl.index_of(w).has_value();
      })
      .def("words", [](const ps::EmbeddingModel& mdl) {
        return std::vector<std::string>(mdl.words().begin(), mdl.words().end());
      })
      .def("lookup", [](const ps::EmbeddingModel& mdl, const std::string& w) -> std::optional<ps::WordVector> {
        auto v = ps::lookup(mdl, w);
        if (!v) return std::nullopt;
        return ps::WordVector(v->begin(), v->end());
      })
      .def("phrase_vector", [](const ps::EmbeddingModel& mdl, const std::vector<std::string>& tokens) {
        return ps::phrase_vector(mdl, tokens);
      })
      .def("__repr__", [](const ps::EmbeddingModel& mdl) {
        return "<EmbeddingModel '" + mdl.model_id() + "' " + std::to_string(mdl.size()) + "x" +
               std::to_string(mdl.dim()) + ">";
      });

  m.def("load_model", [](const std::string& path, std::optional<std::size_t> max_words) {
        return std::make_shared<ps::EmbeddingModel>(ps::load_model_file(path, max_words));
      },
      py::arg("path"), py::arg("max_words") = py::none(),
      "Load word2vec (with header) or GloVe (headerless) text vectors.");
  m.def("load_model_text", [](const std::string& text, std::optional<std::size_t> max_words,
                              const std::string& model_id) {
        std::istringstream in(text);
        return std::make_shared<ps::EmbeddingModel>(ps::load_model(in, max_words, model_id));
      },
      py::arg("text"), py::arg("max_words") = py::none(), py::arg("model_id") = "memory");
  m.def("cosine", [](const std::vector<float>& a, const std::vector<float>& b) { return ps::cosine(a, b); });

  // ingest
  py::class_<ps::PropertyRecord>(m, "PropertyRecord")
      .def(py::init([](std::string id, std::string label, std::optional<std::string> description,
                       std::vector<std::string> aliases) {
             return ps::PropertyRecord{std::move(id), std::move(label), std::move(description),
                                       std::move(aliases)};
           }),
           py::arg("id"), py::arg("label"), py::arg("description") = py::none(),
           py::arg("aliases") = std::vector<std::string>{})
      .def_readwrite("id", &ps::PropertyRecord::id)
      .def_readwrite("label", &ps::PropertyRecord::label)
      .def_readwrite("description", &ps::PropertyRecord::description)
      .def_readwrite("aliases", &ps::PropertyRecord::aliases)
      .def(py::self == py::self)
      .def("__repr__", [](const ps::PropertyRecord& r) { return "<PropertyRecord " + r.id + " '" + r.label + "'>"; });

  m.def("parse_properties", [](const std::string& path, std::optional<std::string> format) {
        std::optional<ps::PropertyFormat> f;
        if (format) f = format_from(*format);
        return ps::parse_properties_file(path, f);
      },
      py::arg("path"), py::arg("format") = py::none());
  m.def("parse_properties_text", [](const std::string& text, const std::string& format) {
        std::istringstream in(text);
        return ps::parse_properties(in, format_from(format));
      },
      py::arg("text"), py::arg("format") = "json");
  m.def("parse_entity_map", [](const std::string& path,
                               std::optional<std::vector<ps::PropertyRecord>> known) {
        return from_entity_map(ps::parse_entity_map_file(path, known ? &*known : nullptr));
      },
      py::arg("path"), py::arg("properties") = py::none());
  m.def("default_stopwords", [] { return ps::default_stopwords(); });
  m.def("tokenize", [](const std::string& text, std::optional<ps::StopwordSet> stopwords) {
        return ps::tokenize(text, stopwords_or_default(stopwords));
      },
      py::arg("text"), py::arg("stopwords") = py::none());

  // index
  py::class_<ps::PropertyIndex, IndexPtr>(m, "PropertyIndex")
      .def_property_readonly("model_id", &ps::PropertyIndex::model_id)
      .def_property_readonly("dim", &ps::PropertyIndex::dim)
      .def_property_readonly("use_description", &ps::PropertyIndex::use_description)
      .def_property_readonly("built_at", &ps::PropertyIndex::built_at)
      .def("__len__", &ps::PropertyIndex::size)
      .def("__contains__", [](const ps::PropertyIndex& idx, const std::string& id) {
        return idx.find(id) != nullptr;
      })
      .def("ids", [](const ps::PropertyIndex& idx) {
        std::vector<std::string> out;
        for (const auto& e : idx.entries()) out.push_back(e.id);
        return out;
      })
      .def("vector", [](const ps::PropertyIndex& idx, const std::string& id) -> std::optional<ps::WordVector> {
        const auto* e = idx.find(id);
        if (!e) throw ps::ScopeError("unknown property '" + id + "'");
        return e->vector;
      })
      .def("__eq__", [](const ps::PropertyIndex& a, const ps::PropertyIndex& b) { return a == b; });

  m.def("build_index", [](const ps::EmbeddingModel& model, const std::vector<ps::PropertyRecord>& props,
                          bool use_description, std::optional<ps::StopwordSet> stopwords,
                          std::optional<std::int64_t> built_at) {
        return std::make_shared<ps::PropertyIndex>(ps::build_index(
            model, props, use_description, stopwords_or_default(stopwords), built_at));
      },
      py::arg("model"), py::arg("properties"), py::arg("use_description") = false,
      py::arg("stopwords") = py::none(), py::arg("built_at") = py::none());
  m.def("save_index", [](const ps::PropertyIndex& idx, const std::string& path) { ps::save_index_file(idx, path); });
  m.def("load_index", [](const std::string& path) {
    return std::make_shared<ps::PropertyIndex>(ps::load_index_file(path));
  });
  m.def("index_to_bytes", [](const ps::PropertyIndex& idx) {
    std::ostringstream out;
    ps::save_index(idx, out);
    return py::bytes(out.str());
  });
  m.def("index_from_bytes", [](const py::bytes& data) {
    std::istringstream in{std::string(data)};
    return std::make_shared<ps::PropertyIndex>(ps::load_index(in));
  });

  // ranker
  py::class_<ps::RankedMatch>(m, "RankedMatch")
      .def_readonly("property_id", &ps::RankedMatch::property_id)
      .def_readonly("label", &ps::RankedMatch::label)
      .def_property_readonly("tier", [](const ps::RankedMatch& r) { return std::string(ps::tier_name(r.tier)); })
      .def_readonly("score", &ps::RankedMatch::score)
      .def_readonly("rank", &ps::RankedMatch::rank)
      .def("__repr__", [](const ps::RankedMatch& r) {
        return "<RankedMatch " + std::to_string(r.rank) + " " + r.property_id + " " +
               std::string(ps::tier_name(r.tier)) + " " + std::to_string(r.score) + ">";
      });

  m.def("search", [](const ps::PropertyIndex& idx, const ps::EmbeddingModel& model, const std::string& query,
                     std::optional<std::vector<std::string>> scope, std::size_t limit,
                     std::optional<ps::StopwordSet> stopwords) {
        return ps::search(idx, model, query, scope, limit, stopwords_or_default(stopwords));
      },
      py::arg("index"), py::arg("model"), py::arg("query"), py::arg("scope") = py::none(),
      py::arg("limit") = 10, py::arg("stopwords") = py::none());
  m.def("rank_semantic", [](const ps::PropertyIndex& idx, const ps::EmbeddingModel& model,
                            const std::string& query, std::optional<std::vector<std::string>> scope,
                            std::optional<ps::StopwordSet> stopwords) {
        std::vector<std::pair<std::string, double>> out;
        for (auto& s : ps::rank_semantic(idx, model, query, scope, stopwords_or_default(stopwords))) {
          out.emplace_back(std::move(s.property_id), s.score);
        }
        return out;
      },
      py::arg("index"), py::arg("model"), py::arg("query"), py::arg("scope") = py::none(),
      py::arg("stopwords") = py::none());

  // eval
  py::class_<ps::GoldInstance>(m, "GoldInstance")
      .def(py::init([](std::string alias, std::string target, std::optional<std::string> entity) {
             return ps::GoldInstance{std::move(alias), std::move(target), std::move(entity)};
           }),
           py::arg("alias"), py::arg("target_property"), py::arg("entity_scope") = py::none())
      .def_readonly("alias", &ps::GoldInstance::alias)
      .def_readonly("target_property", &ps::GoldInstance::target_property)
      .def_readonly("entity_scope", &ps::GoldInstance::entity_scope)
      .def(py::self == py::self);

  py::class_<ps::RankMetrics>(m, "RankMetrics")
      .def_readonly("instance_count", &ps::RankMetrics::instance_count)
      .def_readonly("unresolvable_count", &ps::RankMetrics::unresolvable_count)
      .def_readonly("top1", &ps::RankMetrics::top1)
      .def_readonly("top3", &ps::RankMetrics::top3)
      .def_readonly("top10", &ps::RankMetrics::top10)
      .def_readonly("mrr", &ps::RankMetrics::mrr);

  py::class_<ps::EvalReport>(m, "EvalReport")
      .def_readonly("metrics", &ps::EvalReport::metrics)
      .def_readonly("sampled_entities", &ps::EvalReport::sampled_entities)
      .def_readonly("alias_coverage", &ps::EvalReport::alias_coverage)
      .def_readonly("mean_aliases", &ps::EvalReport::mean_aliases)
      .def("text", [](const ps::EvalReport& r) {
        std::ostringstream out;
        ps::write_report(r, out);
        return out.str();
      })
      .def("row", [](const ps::EvalReport& r) {
        std::ostringstream out;
        ps::write_report_row(r, out);
        return out.str();
      });

  m.def("build_gold", [](const std::vector<ps::PropertyRecord>& props, bool include_label_duplicates) {
        return ps::build_gold(props, include_label_duplicates);
      },
      py::arg("properties"), py::arg("include_label_duplicates") = true);
  m.def("summarize_ranks", [](const std::vector<std::optional<std::size_t>>& ranks) {
    return ps::summarize_ranks(ranks);
  });
  m.def("rank_of_target", [](const ps::PropertyIndex& idx, const ps::EmbeddingModel& model,
                             const ps::GoldInstance& g, std::optional<std::vector<std::string>> scope,
                             std::optional<ps::StopwordSet> stopwords) {
        return ps::rank_of_target(idx, model, g, scope, stopwords_or_default(stopwords));
      },
      py::arg("index"), py::arg("model"), py::arg("instance"), py::arg("scope") = py::none(),
      py::arg("stopwords") = py::none());
  m.def("evaluate", [](const ps::PropertyIndex& idx, const ps::EmbeddingModel& model,
                       const std::vector<ps::GoldInstance>& gold, const std::string& scope,
                       std::optional<std::map<std::string, std::vector<std::string>>> entities,
                       unsigned workers, std::optional<ps::StopwordSet> stopwords) {
        std::optional<ps::EntityPropertyMap> map;
        if (entities) map = to_entity_map(*entities);
        py::gil_scoped_release release;
        return ps::evaluate(idx, model, gold, scope_from(scope), stopwords_or_default(stopwords),
                            map ? &*map : nullptr, {workers});
      },
      py::arg("index"), py::arg("model"), py::arg("gold"), py::arg("scope") = "full",
      py::arg("entities") = py::none(), py::arg("workers") = 0, py::arg("stopwords") = py::none());
  m.def("sample_entities", [](const std::map<std::string, std::vector<std::string>>& entities,
                              std::size_t n, std::uint64_t seed) {
        return ps::sample_entities(to_entity_map(entities), n, seed);
      },
      py::arg("entities"), py::arg("sample_size"), py::arg("seed"));
  m.def("entity_simulation", [](const ps::PropertyIndex& idx, const ps::EmbeddingModel& model,
                                const std::map<std::string, std::vector<std::string>>& entities,
                                const std::vector<ps::PropertyRecord>& props, std::size_t sample_size,
                                std::uint64_t seed, unsigned workers,
                                std::optional<ps::StopwordSet> stopwords) {
        const auto map = to_entity_map(entities);
        py::gil_scoped_release release;
        return ps::entity_simulation(idx, model, map, props, sample_size, seed,
                                     stopwords_or_default(stopwords), {workers});
      },
      py::arg("index"), py::arg("model"), py::arg("entities"), py::arg("properties"),
      py::arg("sample_size"), py::arg("seed"), py::arg("workers") = 0, py::arg("stopwords") = py::none());

  py::class_<ps::AliasAuditRow>(m, "AliasAuditRow")
      .def_readonly("property_id", &ps::AliasAuditRow::property_id)
      .def_readonly("alias", &ps::AliasAuditRow::alias)
      .def_readonly("similarity", &ps::AliasAuditRow::similarity)
      .def_property_readonly("flag", [](const ps::AliasAuditRow& r) { return std::string(ps::audit_flag_name(r.flag)); });
  m.def("audit_aliases", [](const ps::PropertyIndex& idx, const ps::EmbeddingModel& model, double threshold,
                            std::optional<ps::StopwordSet> stopwords) {
        return ps::audit_aliases(idx, model, stopwords_or_default(stopwords), threshold);
      },
      py::arg("index"), py::arg("model"), py::arg("threshold") = ps::kDefaultAuditThreshold,
      py::arg("stopwords") = py::none());

  // JSON API handlers without the HTTP transport.
  py::class_<ps::RankService>(m, "RankService")
      .def(py::init([](IndexPtr idx, ModelPtr model, std::size_t default_limit) {
             ps::ServiceConfig config;
             config.default_limit = default_limit;
             return std::make_unique<ps::RankService>(idx, model, std::move(config));
           }),
           py::arg("index"), py::arg("model"), py::arg("default_limit") = 10)
      .def("health", [](const ps::RankService& s) { auto r = s.health(); return py::make_tuple(r.status, r.body); })
      .def("rank", [](const ps::RankService& s, const std::string& body) {
        auto r = s.rank(body);
        return py::make_tuple(r.status, r.body);
      })
      .def("property", [](const ps::RankService& s, const std::string& id) {
        auto r = s.property(id);
        return py::make_tuple(r.status, r.body);
      });
}
