#pragma once

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>

#include "propsearch/embeddings.hpp"
#include "propsearch/index.hpp"
#include "propsearch/ingest.hpp"

namespace propsearch {

struct ServiceConfig {
  std::string allow_origin = "*";
  std::size_t default_limit = 10;
  StopwordSet stopwords = default_stopwords();
  std::ostream* log = nullptr;  // one JSON object per request; null disables
};

struct HttpResponse {
  int status = 200;
  std::string body;  // JSON
};

/// Request handling for the /v1 JSON API, independent of the transport.
/// Holds shared, immutable index and model; all handlers are const and
/// may run concurrently.
class RankService {
 public:
  RankService(std::shared_ptr<const PropertyIndex> index,
              std::shared_ptr<const EmbeddingModel> model, ServiceConfig config = {});

  /// GET /v1/health
  HttpResponse health() const;
  /// POST /v1/rank with a RankRequest body.
  HttpResponse rank(std::string_view body) const;
  /// GET /v1/properties/{id}
  HttpResponse property(std::string_view id) const;

  const ServiceConfig& config() const noexcept { return config_; }

  void log_request(std::string_view method, std::string_view path, int status,
                   std::size_t query_length, std::size_t scope_size, long long latency_micros) const;

 private:
  bool loaded() const noexcept { return index_ && model_; }

  std::shared_ptr<const PropertyIndex> index_;
  std::shared_ptr<const EmbeddingModel> model_;
  ServiceConfig config_;
  mutable std::mutex log_mutex_;
};

/// HTTP/1.1 front end for a RankService.
class HttpServer {
 public:
  explicit HttpServer(const RankService& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds to host:port (port 0 picks a free port); returns the bound port.
  int bind(const std::string& host, int port);
  /// Serves until stop() is called. Call after bind().
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace propsearch
