#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "protosynth/json.hpp"

namespace protosynth {

// Canonical per-protocol response: a JSON object of field key -> value. The
// "status" field is OK, CRASH or TIMEOUT; `detail` carries diagnostics and
// is never compared.
struct Response {
  Json fields = Json::object();
  std::string detail;

  static Response ok(Json fields);
  static Response crash(std::string detail);
  static Response timeout(std::string detail);

  std::string status() const;
  bool operator==(const Response& o) const { return fields == o.fields; }
  Json to_json() const;
  static Response from_json(const Json& j);
};

struct TriageTuple {
  std::string adapter;
  std::string field;
  std::string observed;
  std::string majority;  // the compared-against value
  // Set only for no-majority tests: the adapter whose value is `majority`.
  std::optional<std::string> versus;

  bool operator==(const TriageTuple&) const = default;
  auto operator<=>(const TriageTuple&) const = default;
};

struct TestTriage {
  std::string test_id;
  std::vector<std::string> majority;  // adapter ids, sorted; empty when no_majority
  bool no_majority = false;
  std::vector<TriageTuple> tuples;
};

// Text form of a field value: strings verbatim, everything else as JSON.
std::string value_text(const Json& v);

// Groups by full equality; the unique largest group is the majority and
// every other adapter yields one tuple per differing field. A tie for the
// largest group sets no_majority and emits pairwise diffs in both
// directions. Throws Error for fewer than two responses.
TestTriage majority_and_triage(const std::vector<std::pair<std::string, Response>>& responses,
                               const std::string& test_id = {});

struct TriageGroup {
  TriageTuple tuple;
  std::size_t count = 0;
  std::vector<std::string> witnesses;  // first `witness_cap` test ids
};

struct TriageReport {
  std::size_t tests = 0;
  std::size_t skipped = 0;
  std::vector<TriageGroup> groups;
  std::vector<std::string> no_majority_tests;
  std::vector<std::string> notes;

  bool has_findings() const { return !groups.empty(); }
  Json to_json() const;
  std::string to_markdown() const;
};

TriageReport aggregate_report(const std::vector<TestTriage>& triages, std::size_t witness_cap = 10);

}  // namespace protosynth
