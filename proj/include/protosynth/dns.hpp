#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "protosynth/error.hpp"
#include "protosynth/json.hpp"
#include "protosynth/test_case.hpp"

namespace protosynth::dns {

// Absolute name as raw labels, root excluded.
using Name = std::vector<std::string>;

constexpr std::size_t kMaxLabel = 63;
constexpr std::size_t kMaxName = 255;  // wire octets, including length bytes and root

// Master-file text with a trailing dot; bytes outside [A-Za-z0-9*_-] are
// written as \DDD. The root is ".".
std::string name_to_text(const Name& n);
// Accepts absolute or `origin`-relative text, "@", and \X / \DDD escapes.
// Throws ParseError for empty labels or limit violations.
Name parse_name(std::string_view text, const Name& origin = {});
std::size_t wire_length(const Name& n);
Name lower(const Name& n);
bool is_subdomain(const Name& n, const Name& ancestor);  // true when equal

// Type mnemonic <-> code for the types the tool emits; others as TYPE<n>.
std::uint16_t type_code(std::string_view mnemonic);
std::string type_name(std::uint16_t code);
std::string rcode_name(int rcode);
int rcode_value(std::string_view name);

struct Record {
  Name owner;
  std::string type;   // mnemonic
  std::string rdata;  // presentation form, names absolute
  std::uint32_t ttl = 300;
};

struct Zone {
  Name origin;
  std::vector<Record> records;
  std::string to_text() const;  // $ORIGIN/$TTL then "<owner> <TYPE> <rdata>" lines
};

// Parses the subset of master-file syntax written by Zone::to_text plus
// optional TTL and class fields, comments, and parentheses on one line.
Zone parse_zone(std::string_view text);

struct Query {
  Name name;
  std::string type;
};

struct Scenario {
  Zone zone;
  Query query;
  Json to_json() const;  // {"zone": text, "origin", "query": {"name", "type"}}
  static Scenario from_json(const Json& j);
};

struct PostprocessOptions {
  std::string suffix = "test.";
  std::string query_type = "CNAME";
  std::string nameserver = "ns1.outside.edu.";
  std::string query_arg;  // empty: the first text input
};

// Builds a servable zone and a query from a DNS model test: adds SOA and NS
// apex records and roots every test name under `suffix`. Records come from
// struct inputs with record_type/name/rdata fields (or arrays of them).
// Throws Error when a name cannot be rooted within the DNS limits.
Scenario postprocess_dns(const TestCase& test, const PostprocessOptions& options = {});

// Wire format ---------------------------------------------------------------

struct WireRecord {
  Name owner;
  std::uint16_t type = 0;
  std::uint16_t klass = 1;
  std::uint32_t ttl = 0;
  std::string rdata;  // presentation form
};

struct Message {
  std::uint16_t id = 0;
  bool qr = false, aa = false, tc = false, rd = false, ra = false;
  int opcode = 0;
  int rcode = 0;
  Name qname;
  std::uint16_t qtype = 0;
  std::vector<WireRecord> answer, authority, additional;
};

std::vector<std::uint8_t> encode_message(const Message& m);
// Follows compression pointers. Throws ParseError on malformed input.
Message decode_message(std::span<const std::uint8_t> bytes);

// Canonical response fields: rcode, flags, answer, authority, additional.
// Record sets are sorted "owner TYPE rdata" strings with lowercased names;
// TTLs are excluded. Idempotent on its own output.
Json normalize(const Message& m);
Json normalize_fields(const Json& fields);

}  // namespace protosynth::dns
