#include "protosynth/llm_gateway.hpp"

#include <httplib.h>

#include <cstdlib>
#include <future>
#include <thread>

#include "protosynth/json.hpp"
#include "protosynth/util.hpp"

namespace protosynth {

std::vector<std::string> GenerationConfig::validate() const {
  std::vector<std::string> out;
  if (k < 1) out.push_back("k must be >= 1");
  if (!(temperature >= 0.0 && temperature <= 1.0)) out.push_back("temperature must be within [0, 1]");
  if (max_output_tokens < 1) out.push_back("max_output_tokens must be >= 1");
  if (request_timeout.count() <= 0) out.push_back("request_timeout must be positive");
  if (retries < 1) out.push_back("retries must be >= 1");
  return out;
}

std::string stub_fixture_key(const PromptPair& prompt) {
  std::string data = prompt.system;
  data.push_back('\0');
  data += prompt.user;
  return util::sha256_hex(data);
}

StubBackend::StubBackend(std::filesystem::path dir) : dir_(std::move(dir)) {}

std::filesystem::path StubBackend::fixture_path(const PromptPair& prompt, int sample_index) const {
  return dir_ / (stub_fixture_key(prompt) + "-" + std::to_string(sample_index) + ".txt");
}

std::string StubBackend::complete(const PromptPair& prompt, double, int sample_index, const GenerationConfig&) {
  auto path = fixture_path(prompt, sample_index);
  if (!std::filesystem::is_regular_file(path)) {
    throw GatewayError("no stub completion for " + prompt.target_module + ": expected " +
                       path.filename().string() + " (key " + stub_fixture_key(prompt) + ", sample " +
                       std::to_string(sample_index) + ") in " + dir_.string());
  }
  return util::read_file(path);
}

std::string StubBackend::describe() const { return "stub:" + dir_.string(); }

RemoteChatBackend::RemoteChatBackend(Options options) : options_(std::move(options)) {
  const std::string& ep = options_.endpoint;
  auto scheme_end = ep.find("://");
  if (scheme_end == std::string::npos) throw GatewayError("endpoint must start with http:// or https://: " + ep);
  auto path_start = ep.find('/', scheme_end + 3);
  scheme_host_port_ = ep.substr(0, path_start);
  base_path_ = path_start == std::string::npos ? "" : ep.substr(path_start);
  while (!base_path_.empty() && base_path_.back() == '/') base_path_.pop_back();
}

std::string RemoteChatBackend::describe() const { return "remote:" + options_.endpoint + " model=" + options_.model; }

std::string RemoteChatBackend::complete(const PromptPair& prompt, double temperature, int,
                                        const GenerationConfig& cfg) {
  Json messages = Json::array();
  if (!prompt.system.empty()) messages.push_back(Json{{"role", "system"}, {"content", prompt.system}});
  messages.push_back(Json{{"role", "user"}, {"content", prompt.user}});
  Json body{{"model", options_.model},
            {"messages", messages},
            {"temperature", temperature},
            {"max_tokens", cfg.max_output_tokens}};
  httplib::Headers headers;
  if (!options_.api_key_env.empty()) {
    const char* key = std::getenv(options_.api_key_env.c_str());
    if (key != nullptr && *key != '\0') headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  httplib::Client client(scheme_host_port_);
  auto secs = std::chrono::duration_cast<std::chrono::seconds>(cfg.request_timeout);
  auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(cfg.request_timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());

  const std::string path = base_path_ + "/chat/completions";
  const std::string payload = body.dump();
  std::string last_error;
  auto backoff = options_.initial_backoff;
  for (int attempt = 1; attempt <= std::max(1, cfg.retries); ++attempt) {
    auto res = client.Post(path, headers, payload, "application/json");
    if (!res) {
      last_error = "transport failure: " + httplib::to_string(res.error());
    } else if (res->status == 200) {
      try {
        auto j = Json::parse(res->body);
        return j.at("choices").at(0).at("message").at("content").get<std::string>();
      } catch (const std::exception& e) {
        throw GatewayError("malformed chat-completions response: " + std::string(e.what()));
      }
    } else if (res->status == 401 || res->status == 403) {
      throw GatewayError("authentication failed (HTTP " + std::to_string(res->status) + "); check $" +
                         options_.api_key_env);
    } else if (res->status == 429 || res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
    } else {
      throw GatewayError("HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 500));
    }
    if (attempt < cfg.retries) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
  }
  throw GatewayError("request failed after " + std::to_string(std::max(1, cfg.retries)) + " attempt(s): " +
                     last_error);
}

std::unique_ptr<CompletionBackend> make_backend(const BackendConfig& cfg) {
  if (cfg.kind == BackendConfig::Kind::stub) return std::make_unique<StubBackend>(cfg.fixtures);
  RemoteChatBackend::Options o;
  o.endpoint = cfg.endpoint;
  o.model = cfg.model;
  o.api_key_env = cfg.api_key_env;
  return std::make_unique<RemoteChatBackend>(std::move(o));
}

SampleSet sample_k(CompletionBackend& backend, const PromptPair& prompt, const GenerationConfig& cfg) {
  if (auto v = cfg.validate(); !v.empty()) throw ValidationError(v);
  std::vector<std::future<std::string>> futures;
  futures.reserve(static_cast<std::size_t>(cfg.k));
  for (int i = 0; i < cfg.k; ++i) {
    futures.push_back(std::async(std::launch::async, [&backend, &prompt, &cfg, i] {
      return backend.complete(prompt, cfg.temperature, i, cfg);
    }));
  }
  SampleSet out;
  for (int i = 0; i < cfg.k; ++i) {
    try {
      out.samples.push_back(Sample{i, futures[static_cast<std::size_t>(i)].get()});
    } catch (const std::exception& e) {
      out.failures.push_back(SampleFailure{i, e.what()});
    }
  }
  return out;
}

}  // namespace protosynth
