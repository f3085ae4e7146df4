#include "protosynth/llm_gateway.hpp"

#include <gtest/gtest.h>
#include <httplib.h>

#include <atomic>
#include <thread>

#include "protosynth/json.hpp"
#include "protosynth/util.hpp"

using namespace protosynth;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
  auto d = fs::temp_directory_path() / ("ps_gw_" + tag + "_" + std::to_string(::getpid()));
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

PromptPair prompt() { return PromptPair{"sys", "user text", "mod"}; }

// Serves chat completions; the first `failures` requests get 429.
class FakeServer {
 public:
  explicit FakeServer(int failures) : failures_(failures) {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      int n = ++requests;
      last_body = req.body;
      last_auth = req.get_header_value("Authorization");
      if (n <= failures_) {
        res.status = 429;
        return;
      }
      res.set_content(R"({"choices": [{"message": {"content": "int f(void);"}}]})", "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeServer() {
    server_.stop();
    thread_.join();
  }
  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }

  std::atomic<int> requests{0};
  std::string last_body, last_auth;

 private:
  int failures_;
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

RemoteChatBackend remote(const FakeServer& s) {
  RemoteChatBackend::Options o;
  o.endpoint = s.endpoint();
  o.model = "test-model";
  o.api_key_env = "PS_TEST_KEY";
  o.initial_backoff = std::chrono::milliseconds(1);
  return RemoteChatBackend(o);
}

}  // namespace

TEST(StubKey, IsSha256OfSystemNulUser) {
  // SHA-256 of the single byte 0x00.
  EXPECT_EQ(stub_fixture_key(PromptPair{"", "", "m"}),
            "6e340b9cffb37a989ca544e6bb780a2c78901d3fb33738768511a30617afa01d");
  EXPECT_NE(stub_fixture_key(PromptPair{"a", "b", ""}), stub_fixture_key(PromptPair{"ab", "", ""}));
}

TEST(Stub, ReadsIndexedFixture) {
  auto dir = temp_dir("stub");
  StubBackend b(dir);
  util::write_file(b.fixture_path(prompt(), 1), "body one");
  EXPECT_EQ(b.fixture_path(prompt(), 1).filename().string(), stub_fixture_key(prompt()) + "-1.txt");
  EXPECT_EQ(b.complete(prompt(), 0.6, 1, GenerationConfig{}), "body one");
  try {
    b.complete(prompt(), 0.6, 0, GenerationConfig{});
    FAIL();
  } catch (const GatewayError& e) {
    EXPECT_NE(std::string(e.what()).find(stub_fixture_key(prompt())), std::string::npos);
  }
  fs::remove_all(dir);
}

TEST(SampleK, PartialFailuresAreData) {
  auto dir = temp_dir("partial");
  StubBackend b(dir);
  for (int i : {0, 2, 3}) util::write_file(b.fixture_path(prompt(), i), "s" + std::to_string(i));
  GenerationConfig cfg;
  cfg.k = 5;
  auto set = sample_k(b, prompt(), cfg);
  ASSERT_EQ(set.samples.size(), 3u);
  EXPECT_EQ(set.samples[1].index, 2);
  EXPECT_EQ(set.samples[1].text, "s2");
  ASSERT_EQ(set.failures.size(), 2u);
  EXPECT_EQ(set.failures[0].index, 1);
  EXPECT_EQ(set.failures[1].index, 4);
  fs::remove_all(dir);
}

TEST(SampleK, RejectsBadConfig) {
  StubBackend b(".");
  GenerationConfig cfg;
  cfg.k = 0;
  EXPECT_THROW(sample_k(b, prompt(), cfg), ValidationError);
  cfg.k = 1;
  cfg.temperature = -1;
  EXPECT_FALSE(cfg.validate().empty());
}

TEST(Remote, RetriesRateLimitThenSucceeds) {
  FakeServer s(2);
  ::setenv("PS_TEST_KEY", "secret", 1);
  auto b = remote(s);
  GenerationConfig cfg;
  cfg.retries = 3;
  EXPECT_EQ(b.complete(prompt(), 0.6, 0, cfg), "int f(void);");
  EXPECT_EQ(s.requests.load(), 3);
  EXPECT_EQ(s.last_auth, "Bearer secret");
  auto body = Json::parse(s.last_body);
  EXPECT_EQ(body["model"], "test-model");
  EXPECT_EQ(body["temperature"], 0.6);
  EXPECT_EQ(body["messages"][0]["role"], "system");
  EXPECT_EQ(body["messages"][1]["content"], "user text");
  ::unsetenv("PS_TEST_KEY");
}

TEST(Remote, GivesUpAfterRetryBudget) {
  FakeServer s(10);
  auto b = remote(s);
  GenerationConfig cfg;
  cfg.retries = 2;
  EXPECT_THROW(b.complete(prompt(), 0.6, 0, cfg), GatewayError);
  EXPECT_EQ(s.requests.load(), 2);
}

TEST(Remote, OmitsEmptySystemMessage) {
  FakeServer s(0);
  auto b = remote(s);
  b.complete(PromptPair{"", "only user", "m"}, 0.0, 0, GenerationConfig{});
  auto body = Json::parse(s.last_body);
  ASSERT_EQ(body["messages"].size(), 1u);
  EXPECT_EQ(body["messages"][0]["role"], "user");
}

TEST(Remote, RejectsEndpointWithoutScheme) {
  RemoteChatBackend::Options o;
  o.endpoint = "localhost:1234";
  EXPECT_THROW(RemoteChatBackend{o}, GatewayError);
}
