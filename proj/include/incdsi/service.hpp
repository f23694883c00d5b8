#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include <json.hpp>

#include "incdsi/incremental.hpp"
#include "incdsi/live_index.hpp"

namespace incdsi {

/// HTTP front end over a LiveIndex.
///
///   POST /v1/documents  {doc_id, query_embeddings: [[...], ...]}
///                       -> {doc_id, feasible, iterations, restarts, wall_millis, ...}
///   POST /v1/search     {embedding: [...], k} -> {results: [{doc_id, score}, ...]}
///   GET  /v1/stats      -> {num_docs, n0, dim}
///   POST /v1/snapshot   {path} -> {ok: true}
///
/// Errors: 400 malformed body, 409 duplicate doc_id, 422 dimension mismatch,
/// 500 anything else. Additions run one at a time in arrival order; searches
/// read the last committed view and never wait for an addition to finish.
class Service {
 public:
  struct Response {
    int status;
    nlohmann::json body;
  };

  Service(IndexState state, AddOptions options);
  ~Service();

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  Response add_document(const std::string& body);
  Response search(const std::string& body) const;
  Response stats() const;
  Response snapshot(const std::string& body);

  /// Binds to host:port (port 0 picks a free port) and returns the bound
  /// port, or -1 on failure.
  int bind(const std::string& host, int port);
  /// Serves requests on the bound socket until stop() is called.
  bool serve_forever();
  /// Blocks until serve_forever() is accepting connections.
  void wait_until_ready() const;
  void stop();

  const LiveIndex& index() const noexcept { return live_; }

 private:
  LiveIndex live_;
  AddOptions options_;
  struct Server;
  std::unique_ptr<Server> server_;
};

}  // namespace incdsi
