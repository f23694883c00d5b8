#include "incdsi/service.hpp"

#include <httplib.h>

#include "incdsi/errors.hpp"
#include "incdsi/io.hpp"
#include "incdsi/metrics.hpp"
#include "incdsi/serialize.hpp"

namespace incdsi {

using nlohmann::json;

namespace {

Service::Response error(int status, const std::string& message) {
  return {status, json{{"error", message}}};
}

/// Thrown for request bodies that cannot be interpreted (400).
struct BadRequest : std::runtime_error {
  using std::runtime_error::runtime_error;
};

json parse_body(const std::string& body) {
  json j = json::parse(body, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) throw BadRequest("body must be a JSON object");
  return j;
}

std::vector<float> parse_vector(const json& j, const char* what) {
  if (!j.is_array() || j.empty()) throw BadRequest(std::string(what) + " must be a non-empty array");
  std::vector<float> out;
  out.reserve(j.size());
  for (const auto& x : j) {
    if (!x.is_number()) throw BadRequest(std::string(what) + " must contain only numbers");
    out.push_back(x.get<float>());
  }
  return out;
}

template <class Fn>
Service::Response guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const BadRequest& e) {
    return error(400, e.what());
  } catch (const InvalidArgument& e) {
    return error(400, e.what());
  } catch (const DuplicateIdError& e) {
    return error(409, e.what());
  } catch (const ShapeError& e) {
    return error(422, e.what());
  } catch (const std::exception& e) {
    return error(500, e.what());
  }
}

}  // namespace

struct Service::Server {
  httplib::Server http;
};

Service::Service(IndexState state, AddOptions options)
    : live_(std::move(state)), options_(options), server_(std::make_unique<Server>()) {
  options_.hp.validate();
  options_.optimizer.validate();

  auto reply = [](httplib::Response& res, const Response& r) {
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  auto& http = server_->http;
  http.Post("/v1/documents", [this, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, add_document(req.body));
  });
  http.Post("/v1/search", [this, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, search(req.body));
  });
  http.Get("/v1/stats", [this, reply](const httplib::Request&, httplib::Response& res) {
    reply(res, stats());
  });
  http.Post("/v1/snapshot", [this, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, snapshot(req.body));
  });
}

Service::~Service() { stop(); }

Service::Response Service::add_document(const std::string& body) {
  return guarded([&]() -> Response {
    const json j = parse_body(body);
    if (!j.contains("doc_id") || !j["doc_id"].is_string() || j["doc_id"].get<std::string>().empty()) {
      throw BadRequest("doc_id must be a non-empty string");
    }
    if (!j.contains("query_embeddings") || !j["query_embeddings"].is_array() ||
        j["query_embeddings"].empty()) {
      throw BadRequest("query_embeddings must be a non-empty array of vectors");
    }
    Matrix queries;
    for (const auto& q : j["query_embeddings"]) {
      const auto row = parse_vector(q, "query embedding");
      if (!queries.empty() && row.size() != queries.cols()) {
        throw ShapeError("query embeddings have inconsistent dimensions");
      }
      queries.push_row(row);
    }
    const std::string doc_id = j["doc_id"].get<std::string>();
    const AddReport report = live_.update(
        [&](IndexState& state) { return incdsi::add_document(state, doc_id, queries, options_); });
    return {200, to_json(report)};
  });
}

Service::Response Service::search(const std::string& body) const {
  return guarded([&]() -> Response {
    const json j = parse_body(body);
    if (!j.contains("embedding")) throw BadRequest("embedding is required");
    const auto query = parse_vector(j["embedding"], "embedding");
    const IndexView view = live_.snapshot();
    std::size_t k = std::min<std::size_t>(10, view.size());
    if (j.contains("k")) {
      if (!j["k"].is_number_integer() || j["k"].get<long long>() < 1) {
        throw BadRequest("k must be a positive integer");
      }
      k = j["k"].get<std::size_t>();
    }
    if (query.size() != view.dim()) {
      throw ShapeError("embedding has dimension " + std::to_string(query.size()) +
                       ", index has " + std::to_string(view.dim()));
    }
    const RankedResult ranked = top_k(view, query, k);
    json results = json::array();
    for (const auto& hit : ranked.entries) {
      results.push_back({{"doc_id", hit.doc_id}, {"score", hit.score}});
    }
    return {200, json{{"results", results}}};
  });
}

Service::Response Service::stats() const {
  const IndexView view = live_.snapshot();
  return {200, json{{"num_docs", view.size()}, {"n0", view.n0()}, {"dim", view.dim()}}};
}

Service::Response Service::snapshot(const std::string& body) {
  return guarded([&]() -> Response {
    const json j = parse_body(body);
    if (!j.contains("path") || !j["path"].is_string() || j["path"].get<std::string>().empty()) {
      throw BadRequest("path must be a non-empty string");
    }
    io::save_snapshot(live_.copy_state(), options_.hp, j["path"].get<std::string>());
    return {200, json{{"ok", true}}};
  });
}

int Service::bind(const std::string& host, int port) {
  if (port == 0) return server_->http.bind_to_any_port(host);
  return server_->http.bind_to_port(host, port) ? port : -1;
}

bool Service::serve_forever() { return server_->http.listen_after_bind(); }

void Service::wait_until_ready() const { server_->http.wait_until_ready(); }

void Service::stop() {
  if (server_ && server_->http.is_running()) server_->http.stop();
}

}  // namespace incdsi
