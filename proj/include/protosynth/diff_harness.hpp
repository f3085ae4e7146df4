#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "protosynth/json.hpp"
#include "protosynth/state_driver.hpp"
#include "protosynth/test_case.hpp"
#include "protosynth/triage.hpp"

namespace protosynth {

// An implementation under test. One instance handles one test at a time:
// setup(stimulus), execute(stimulus), teardown().
class Adapter {
 public:
  virtual ~Adapter() = default;
  virtual const std::string& id() const = 0;
  virtual void setup(const Json& stimulus) = 0;
  virtual Response execute(const Json& stimulus) = 0;
  virtual void teardown() = 0;
};

class AdapterError : public Error {
 public:
  using Error::Error;
};

// Kinds:
//   command:  {"command": [argv...], "setup": [argv...]?, "teardown": [argv...]?}
//             stimulus JSON on stdin, response fields JSON on stdout
//   dns-udp:  {"server": "127.0.0.1", "port": 53, "zone_file": path?, "reload": [argv...]?}
//   smtp-tcp: {"host": "127.0.0.1", "port": 8025, "reset": [argv...]?}
// Every kind takes "id" and "timeout" (duration text, default "10s").
// Relative paths resolve against `base_dir`. Throws ValidationError.
std::unique_ptr<Adapter> make_adapter(const Json& cfg, const std::filesystem::path& base_dir = {});

// SMTP translate layer: completes bare command prefixes from the state
// graph ("MAIL FROM:" -> "MAIL FROM:<sender@client.test>"); other inputs
// pass through unchanged.
std::string smtp_translate(const std::string& input);

// Sends the BFS prefix to `state`, then `input`, through one adapter
// session and returns the reply to `input`. The adapter is torn down
// afterwards.
Response drive_and_execute(Adapter& adapter, const StateGraph& graph, const std::string& state,
                           const std::string& input);

struct Stimulus {
  std::string test_id;
  Json data;
};

struct ProtocolConfig {
  std::string kind = "generic";  // dns, smtp or generic
  Json options = Json::object();
  static ProtocolConfig from_json(const Json& j);
  Json to_json() const;
};

struct Translation {
  std::vector<Stimulus> stimuli;
  std::vector<std::string> skipped;  // "<test id>: <reason>"
};

// dns:     {"zone", "origin", "query"} via postprocess_dns
// smtp:    {"prefix": [...], "input": ...} driving to the test's state
// generic: {"inputs": {name: value}}
Translation translate_suite(const std::vector<TestCase>& tests, const ProtocolConfig& protocol,
                            const std::optional<StateGraph>& graph = std::nullopt);

// Drops ignored fields and applies the protocol's canonical form.
Response normalize_response(const Response& r, const ProtocolConfig& protocol,
                            const std::vector<std::string>& ignore_fields = {});

struct TestResponses {
  std::string test_id;
  std::vector<std::pair<std::string, Response>> responses;  // adapter order
};

// Each adapter runs every stimulus serially on its own thread; failures
// become CRASH or TIMEOUT responses. Throws Error without adapters.
std::vector<TestResponses> run_suite(std::vector<std::unique_ptr<Adapter>>& adapters,
                                     const std::vector<Stimulus>& stimuli);

}  // namespace protosynth
