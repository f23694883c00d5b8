#include <gtest/gtest.h>

#include <httplib.h>

#include <filesystem>
#include <thread>

#include "incdsi/io.hpp"
#include "incdsi/service.hpp"
#include "support/random.hpp"

namespace incdsi {
namespace {

using nlohmann::json;

IndexState five_doc_index() {
  Matrix e(5, 8);
  for (std::size_t i = 0; i < 5; ++i) e(i, i) = 1.0f;
  return IndexState(e, e, testing::sequential_ids(5, "orig"));
}

AddOptions small_margins() {
  AddOptions o;
  o.hp.gamma1 = o.hp.gamma2 = 0.1;
  return o;
}

class ServiceHttp : public ::testing::Test {
 protected:
  void SetUp() override {
    svc_ = std::make_unique<Service>(five_doc_index(), small_margins());
    port_ = svc_->bind("127.0.0.1", 0);
    ASSERT_GT(port_, 0);
    thread_ = std::thread([this] { svc_->serve_forever(); });
    svc_->wait_until_ready();
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
  }
  void TearDown() override {
    svc_->stop();
    thread_.join();
  }

  std::pair<int, json> post(const std::string& path, const json& body) {
    return post_raw(path, body.dump());
  }
  std::pair<int, json> post_raw(const std::string& path, const std::string& body) {
    auto res = client_->Post(path, body, "application/json");
    if (!res) return {-1, json()};
    return {res->status, json::parse(res->body)};
  }

  std::unique_ptr<Service> svc_;
  int port_ = 0;
  std::thread thread_;
  std::unique_ptr<httplib::Client> client_;
};

json unit(std::size_t axis) {
  std::vector<float> v(8, 0.0f);
  v[axis] = 1.0f;
  return v;
}

TEST_F(ServiceHttp, AddThenSearchReadsOwnWrite) {
  const auto [status, body] = post("/v1/documents", {{"doc_id", "new0"}, {"query_embeddings", {unit(6)}}});
  ASSERT_EQ(status, 200) << body.dump();
  EXPECT_TRUE(body["feasible"].get<bool>());
  EXPECT_GE(body["iterations"].get<int>(), 1);
  EXPECT_EQ(body["restarts"].get<int>(), 0);
  EXPECT_TRUE(body.contains("wall_millis"));

  const auto [s2, hits] = post("/v1/search", {{"embedding", unit(6)}, {"k", 3}});
  ASSERT_EQ(s2, 200);
  ASSERT_EQ(hits["results"].size(), 3u);
  EXPECT_EQ(hits["results"][0]["doc_id"], "new0");
}

TEST_F(ServiceHttp, StatsCountAdditions) {
  for (int i = 0; i < 3; ++i) {
    const auto [status, body] = post("/v1/documents",
                                     {{"doc_id", "n" + std::to_string(i)}, {"query_embeddings", {unit(5 + i)}}});
    ASSERT_EQ(status, 200) << body.dump();
  }
  auto res = client_->Get("/v1/stats");
  ASSERT_TRUE(res);
  const json stats = json::parse(res->body);
  EXPECT_EQ(stats["num_docs"], 8);
  EXPECT_EQ(stats["n0"], 5);
  EXPECT_EQ(stats["dim"], 8);
}

TEST_F(ServiceHttp, ErrorStatuses) {
  EXPECT_EQ(post("/v1/search", {{"embedding", {1, 2, 3}}}).first, 422);
  EXPECT_EQ(post_raw("/v1/search", "{not json").first, 400);
  EXPECT_EQ(post("/v1/search", {{"embedding", unit(0)}, {"k", 0}}).first, 400);
  EXPECT_EQ(post("/v1/search", {{"embedding", unit(0)}, {"k", 99}}).first, 400);
  EXPECT_EQ(post("/v1/documents", {{"doc_id", "orig0"}, {"query_embeddings", {unit(6)}}}).first, 409);
  EXPECT_EQ(post("/v1/documents", {{"doc_id", "x"}, {"query_embeddings", {{1, 2}}}}).first, 422);
  EXPECT_EQ(post("/v1/documents", {{"doc_id", "x"}, {"query_embeddings", json::array()}}).first, 400);
  EXPECT_EQ(post("/v1/documents", {{"query_embeddings", {unit(6)}}}).first, 400);
  EXPECT_EQ(svc_->index().snapshot().size(), 5u);
}

TEST_F(ServiceHttp, SnapshotEndpointWritesLoadableFile) {
  const auto path = std::filesystem::temp_directory_path() / "incdsi-service-snap.idss";
  const auto [status, body] = post("/v1/snapshot", {{"path", path.string()}});
  ASSERT_EQ(status, 200) << body.dump();
  EXPECT_TRUE(body["ok"].get<bool>());
  EXPECT_EQ(io::load_snapshot(path).first.size(), 5u);
  std::filesystem::remove(path);
}

TEST_F(ServiceHttp, ConcurrentSearchesDuringAdds) {
  std::atomic<bool> done{false};
  std::atomic<int> failures{0};
  std::thread reader([&] {
    httplib::Client c("127.0.0.1", port_);
    while (!done.load()) {
      auto res = c.Post("/v1/search", json{{"embedding", unit(1)}, {"k", 1}}.dump(), "application/json");
      if (!res || res->status != 200 || json::parse(res->body)["results"][0]["doc_id"] != "orig1") ++failures;
    }
  });
  for (int i = 0; i < 10; ++i) {
    std::vector<float> q(8, 0.0f);
    q[5 + i % 3] = 1.0f;
    q[i % 5] = -0.3f;
    post("/v1/documents", {{"doc_id", "c" + std::to_string(i)}, {"query_embeddings", {q}}});
  }
  done = true;
  reader.join();
  EXPECT_EQ(failures.load(), 0);
  EXPECT_EQ(svc_->index().snapshot().size(), 15u);
}

TEST(ServiceDirect, HandlersWithoutNetwork) {
  Service svc(five_doc_index(), small_margins());
  EXPECT_EQ(svc.stats().body["num_docs"], 5);
  const auto r = svc.search(json{{"embedding", unit(2)}}.dump());
  EXPECT_EQ(r.status, 200);
  EXPECT_EQ(r.body["results"].size(), 5u);  // k defaults to min(10, size)
  EXPECT_EQ(r.body["results"][0]["doc_id"], "orig2");
}

}  // namespace
}  // namespace incdsi
