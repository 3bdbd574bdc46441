#include <gtest/gtest.h>

#include <atomic>
#include <thread>

#include <nlohmann/json.hpp>

#include "fixtures.hpp"
#include "s2p/annotator.hpp"
#include "s2p/error.hpp"
#include "s2p/util.hpp"
#include "s2p/vlm.hpp"

// After the project headers: <resolv.h> defines a `_res` macro that Eigen trips over.
#include <httplib.h>

namespace s2p {
namespace {

using nlohmann::json;

/// Local HTTP server on an ephemeral port.
class StubServer {
 public:
  template <typename Handler>
  explicit StubServer(Handler h) {
    server_.Post("/v1/chat", h);
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~StubServer() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat"; }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

Conversation tpv_conversation(std::vector<int> ids) {
  AnnotatedFrame af;
  af.base = Frame(40, 30, Rgb{10, 20, 30});
  for (int id : ids) af.labels.push_back({id, {1.0 + id, 1.0}, WorldPoint{0, 0}, LabelKind::Waypoint, true, false});
  Conversation c;
  c.turns.push_back({Role::User, "where to?", {ImageRef::in_memory(af.base)}});
  c.setup = Setup::Tpv;
  c.valid_ids = ids;
  c.live_labels = af.labels;
  return c;
}

HttpBackendOptions fast_options(const std::string& url) {
  HttpBackendOptions o;
  o.url = url;
  o.base_backoff = std::chrono::milliseconds(1);
  o.timeout = std::chrono::milliseconds(2000);
  return o;
}

TEST(HttpBackend, ServerErrorThriceIsHttpStatus) {
  std::atomic<int> calls{0};
  StubServer stub([&](const httplib::Request&, httplib::Response& res) {
    ++calls;
    res.status = 500;
  });
  HttpBackend backend(fast_options(stub.url()));
  try {
    backend.complete(tpv_conversation({0, 1, 2}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::HttpStatus);
    EXPECT_EQ(e.detail(), "500");
  }
  EXPECT_EQ(calls.load(), 3);
}

TEST(HttpBackend, RetriesThenSucceedsAndSendsWireFormat) {
  std::atomic<int> calls{0};
  json seen;
  std::string auth;
  StubServer stub([&](const httplib::Request& req, httplib::Response& res) {
    if (++calls < 3) {
      res.status = 503;
      return;
    }
    seen = json::parse(req.body);
    auth = req.get_header_value("Authorization");
    res.set_content(json{{"text", "{\"commands\":[1],\"explanation\":\"ok\"}"}}.dump(), "application/json");
  });
  auto opts = fast_options(stub.url());
  opts.api_key = "secret";
  std::vector<Exchange> log;
  opts.log = [&](const Exchange& e) { log.push_back(e); };
  opts.episode_id = "ep-7";
  HttpBackend backend(opts);
  const auto conv = tpv_conversation({0, 1});
  EXPECT_EQ(backend.complete(conv), "{\"commands\":[1],\"explanation\":\"ok\"}");
  EXPECT_EQ(calls.load(), 3);
  EXPECT_EQ(auth, "Bearer secret");
  ASSERT_EQ(seen["turns"].size(), 1u);
  EXPECT_EQ(seen["turns"][0]["role"], "user");
  const auto png = base64_decode(seen["turns"][0]["images"][0].get<std::string>());
  EXPECT_EQ(png[1], 'P');
  ASSERT_EQ(log.size(), 3u);
  EXPECT_EQ(log.back().status, 200);
  EXPECT_EQ(log.back().episode_id, "ep-7");
  EXPECT_EQ(log.back().request_digest, request_digest(conv));
}

TEST(HttpBackend, ClientErrorsAreNotRetried) {
  std::atomic<int> calls{0};
  StubServer stub([&](const httplib::Request&, httplib::Response& res) {
    ++calls;
    res.status = 400;
  });
  HttpBackend backend(fast_options(stub.url()));
  EXPECT_THROW(backend.complete(tpv_conversation({0, 1})), Error);
  EXPECT_EQ(calls.load(), 1);
}

TEST(HttpBackend, UnreachableIsTimeout) {
  auto opts = fast_options("http://127.0.0.1:1/v1/chat");
  opts.attempts = 2;
  HttpBackend backend(opts);
  try {
    backend.complete(tpv_conversation({0, 1}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Timeout);
  }
}

TEST(Backend, CapabilitiesAreEnforced) {
  auto opts = fast_options("http://127.0.0.1:1/v1/chat");
  opts.capabilities = {0, 64};
  HttpBackend backend(opts);
  try {
    backend.complete(tpv_conversation({0, 1}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::CapabilityExceeded);
  }
}

TEST(RandomBackend, SeededAndValid) {
  const auto conv = tpv_conversation({0, 3, 5, 8, 13});
  RandomBackend a(7);
  RandomBackend b(7);
  const std::string ra = a.complete(conv);
  EXPECT_EQ(ra, b.complete(conv));
  int differs = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    RandomBackend r(seed);
    const PlanAnswer ans = parse_answer(r.complete(conv), Setup::Tpv, conv.valid_ids);
    EXPECT_GE(ans.commands.size(), 1u);
    EXPECT_LE(ans.commands.size(), 4u);
    for (int id : ans.commands) EXPECT_NE(id, 0);
    differs += r.complete(conv) != ra ? 1 : 0;
  }
  EXPECT_GT(differs, 10);

  Conversation fpv = conv;
  fpv.setup = Setup::Fpv;
  fpv.valid_ids = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  RandomBackend f(1);
  EXPECT_EQ(parse_answer(f.complete(fpv), Setup::Fpv, fpv.valid_ids).commands.size(), 2u);
}

TEST(Cassette, RecordThenReplay) {
  testing::TempDir dir;
  const auto path = dir / "tape.jsonl";
  auto inner = std::make_shared<RandomBackend>(3);
  CassetteRecorder rec(inner, path);
  const auto c1 = tpv_conversation({0, 1, 2});
  const auto c2 = tpv_conversation({0, 4, 5});
  const std::string r1 = rec.complete(c1);
  const std::string r2 = rec.complete(c2);
  CassettePlayer player(path);
  EXPECT_EQ(player.size(), 2u);
  EXPECT_EQ(player.complete(c1), r1);
  EXPECT_EQ(player.complete(c2), r2);
  try {
    player.complete(tpv_conversation({0, 9}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::CassetteMiss);
  }
}

TEST(RequestDigest, CoversTextAndImages) {
  const auto a = tpv_conversation({0, 1});
  auto b = a;
  b.turns[0].text += ".";
  auto c = a;
  c.turns[0].images[0] = ImageRef::in_memory(Frame(40, 30, Rgb{10, 20, 31}));
  EXPECT_EQ(request_digest(a), request_digest(tpv_conversation({0, 1})));
  EXPECT_NE(request_digest(a), request_digest(b));
  EXPECT_NE(request_digest(a), request_digest(c));
}

}  // namespace
}  // namespace s2p
