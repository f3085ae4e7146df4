#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "protosynth/error.hpp"
#include "protosynth/prompt_forge.hpp"

namespace protosynth {

struct GenerationConfig {
  int k = 10;
  double temperature = 0.6;
  int max_output_tokens = 4096;
  std::chrono::milliseconds request_timeout{120000};
  int retries = 3;  // attempts per request, including the first

  std::vector<std::string> validate() const;
};

struct BackendConfig {
  enum class Kind { stub, remote };
  Kind kind = Kind::stub;
  std::filesystem::path fixtures;  // stub
  std::string endpoint;            // remote, e.g. https://host/v1
  std::string model;               // remote
  std::string api_key_env = "OPENAI_API_KEY";
};

class GatewayError : public Error {
 public:
  using Error::Error;
};

class CompletionBackend {
 public:
  virtual ~CompletionBackend() = default;
  // Must be safe to call concurrently.
  virtual std::string complete(const PromptPair& prompt, double temperature, int sample_index,
                               const GenerationConfig& cfg) = 0;
  virtual std::string describe() const = 0;
};

// Completions read from `<dir>/<key>-<index>.txt`, where key is
// stub_fixture_key(prompt).
class StubBackend : public CompletionBackend {
 public:
  explicit StubBackend(std::filesystem::path dir);
  std::string complete(const PromptPair& prompt, double temperature, int sample_index,
                       const GenerationConfig& cfg) override;
  std::string describe() const override;
  std::filesystem::path fixture_path(const PromptPair& prompt, int sample_index) const;

 private:
  std::filesystem::path dir_;
};

// SHA-256 over system, a NUL byte, then user.
std::string stub_fixture_key(const PromptPair& prompt);

// OpenAI-compatible POST {endpoint}/chat/completions.
class RemoteChatBackend : public CompletionBackend {
 public:
  struct Options {
    std::string endpoint;
    std::string model;
    std::string api_key_env = "OPENAI_API_KEY";
    std::chrono::milliseconds initial_backoff{500};
  };
  explicit RemoteChatBackend(Options options);
  std::string complete(const PromptPair& prompt, double temperature, int sample_index,
                       const GenerationConfig& cfg) override;
  std::string describe() const override;

 private:
  Options options_;
  std::string scheme_host_port_;
  std::string base_path_;
};

std::unique_ptr<CompletionBackend> make_backend(const BackendConfig& cfg);

struct Sample {
  int index = 0;
  std::string text;
};
struct SampleFailure {
  int index = 0;
  std::string message;
};
struct SampleSet {
  std::vector<Sample> samples;          // ascending index
  std::vector<SampleFailure> failures;  // ascending index
};

// Requests indices 0..k-1 concurrently; failures are data, not exceptions.
SampleSet sample_k(CompletionBackend& backend, const PromptPair& prompt, const GenerationConfig& cfg);

}  // namespace protosynth
