#include "propsearch/service.hpp"

#include <chrono>
#include <ostream>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "propsearch/errors.hpp"
#include "propsearch/ranker.hpp"

namespace propsearch {

namespace {

using ojson = nlohmann::ordered_json;

HttpResponse error_response(int status, std::string_view code, std::string_view message,
                            ojson extra = ojson::object()) {
  ojson body = {{"error", code}, {"message", message}};
  for (auto& [k, v] : extra.items()) body[k] = v;
  return {status, body.dump()};
}

long long micros_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() -
                                                               start)
      .count();
}

}  // namespace

RankService::RankService(std::shared_ptr<const PropertyIndex> index,
                         std::shared_ptr<const EmbeddingModel> model, ServiceConfig config)
    : index_(std::move(index)), model_(std::move(model)), config_(std::move(config)) {
  if (config_.default_limit == 0) throw ArgumentError("default limit must be at least 1");
  if (loaded() && index_->dim() != model_->dim()) {
    throw DimensionError("index has " + std::to_string(index_->dim()) +
                         " dimensions but model has " + std::to_string(model_->dim()));
  }
}

HttpResponse RankService::health() const {
  if (!loaded()) return error_response(503, "not_loaded", "index or model not loaded");
  ojson body = {{"status", "ok"},
                {"properties", index_->size()},
                {"dim", index_->dim()},
                {"model_id", model_->model_id()},
                {"use_description", index_->use_description()}};
  return {200, body.dump()};
}

HttpResponse RankService::property(std::string_view id) const {
  if (!loaded()) return error_response(503, "not_loaded", "index or model not loaded");
  const IndexEntry* e = index_->find(id);
  if (!e) return error_response(404, "unknown_property", "no property '" + std::string(id) + "'");
  ojson body = {{"property_id", e->id},
                {"label", e->label},
                {"aliases", e->aliases},
                {"has_vector", e->vector.has_value()}};
  return {200, body.dump()};
}

HttpResponse RankService::rank(std::string_view body) const {
  const auto start = std::chrono::steady_clock::now();
  if (!loaded()) return error_response(503, "not_loaded", "index or model not loaded");

  ojson request;
  try {
    request = ojson::parse(body);
  } catch (const ojson::parse_error& e) {
    return error_response(400, "malformed_json", e.what());
  }
  if (!request.is_object()) return error_response(400, "bad_request", "body must be a JSON object");

  auto q = request.find("query");
  if (q == request.end() || !q->is_string()) {
    return error_response(400, "bad_request", "field 'query' must be a string");
  }
  const std::string query = q->get<std::string>();

  std::size_t limit = config_.default_limit;
  if (auto l = request.find("limit"); l != request.end() && !l->is_null()) {
    if (!l->is_number_integer() || l->get<long long>() < 1) {
      return error_response(400, "bad_request", "field 'limit' must be an integer >= 1");
    }
    limit = static_cast<std::size_t>(l->get<long long>());
  }

  CandidateScope scope;
  if (auto s = request.find("entity_properties"); s != request.end() && !s->is_null()) {
    if (!s->is_array() || s->empty()) {
      return error_response(400, "bad_request",
                            "field 'entity_properties' must be a non-empty array of ids");
    }
    std::vector<std::string> ids;
    ojson unknown = ojson::array();
    for (const auto& id : *s) {
      if (!id.is_string()) return error_response(400, "bad_request", "property ids must be strings");
      ids.push_back(id.get<std::string>());
      if (!index_->find(ids.back())) unknown.push_back(ids.back());
    }
    if (!unknown.empty()) {
      return error_response(422, "unknown_properties", "entity_properties names unknown ids",
                            {{"unknown", unknown}});
    }
    scope = std::move(ids);
  }

  const auto tokens = tokenize(query, config_.stopwords);
  std::vector<RankedMatch> matches;
  try {
    matches = search(*index_, *model_, query, scope, limit, config_.stopwords);
  } catch (const ScopeError& e) {
    return error_response(422, "scope_error", e.what());
  }

  ojson results = ojson::array();
  for (const auto& m : matches) {
    results.push_back({{"property_id", m.property_id},
                       {"label", m.label},
                       {"tier", tier_name(m.tier)},
                       {"score", m.score},
                       {"rank", m.rank}});
  }
  ojson response = {{"results", std::move(results)}, {"query_tokens", tokens}};
  if (tokens.empty()) response["reason"] = "empty_query";
  response["elapsed_micros"] = micros_since(start);
  return {200, response.dump()};
}

void RankService::log_request(std::string_view method, std::string_view path, int status,
                              std::size_t query_length, std::size_t scope_size,
                              long long latency_micros) const {
  if (!config_.log) return;
  ojson line = {{"method", method},         {"path", path},
                {"status", status},         {"query_length", query_length},
                {"scope_size", scope_size}, {"latency_micros", latency_micros}};
  std::lock_guard lock(log_mutex_);
  *config_.log << line.dump() << '\n' << std::flush;
}

struct HttpServer::Impl {
  httplib::Server server;
};

HttpServer::HttpServer(const RankService& service) : impl_(std::make_unique<Impl>()) {
  auto& srv = impl_->server;
  const RankService& svc = service;

  srv.set_default_headers({{"Access-Control-Allow-Origin", svc.config().allow_origin},
                           {"Vary", "Origin"}});

  auto reply = [](httplib::Response& res, const HttpResponse& r) {
    res.status = r.status;
    res.set_content(r.body, "application/json");
  };

  auto health = [&svc, reply](const httplib::Request& req, httplib::Response& res) {
    const auto start = std::chrono::steady_clock::now();
    reply(res, svc.health());
    svc.log_request(req.method, req.path, res.status, 0, 0, micros_since(start));
  };
  srv.Get("/v1/health", health);
  srv.Get("/health", health);

  srv.Post("/v1/rank", [&svc, reply](const httplib::Request& req, httplib::Response& res) {
    const auto start = std::chrono::steady_clock::now();
    reply(res, svc.rank(req.body));
    std::size_t query_length = 0;
    std::size_t scope_size = 0;
    auto parsed = nlohmann::json::parse(req.body, nullptr, false);
    if (parsed.is_object()) {
      if (auto q = parsed.find("query"); q != parsed.end() && q->is_string()) {
        query_length = q->get_ref<const std::string&>().size();
      }
      if (auto s = parsed.find("entity_properties"); s != parsed.end() && s->is_array()) {
        scope_size = s->size();
      }
    }
    svc.log_request(req.method, req.path, res.status, query_length, scope_size,
                    micros_since(start));
  });

  srv.Get(R"(/v1/properties/([^/]+))",
          [&svc, reply](const httplib::Request& req, httplib::Response& res) {
            const auto start = std::chrono::steady_clock::now();
            reply(res, svc.property(req.matches[1].str()));
            svc.log_request(req.method, req.path, res.status, 0, 0, micros_since(start));
          });

  srv.Options(R"(/v1/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.status = 204;
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.set_header("Access-Control-Max-Age", "600");
  });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) throw IoError("cannot bind to " + host);
    return bound;
  }
  if (!impl_->server.bind_to_port(host, port)) {
    throw IoError("cannot bind to " + host + ":" + std::to_string(port));
  }
  return port;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

}  // namespace propsearch
