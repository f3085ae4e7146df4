// Builds the DNAME model with the library API instead of a manifest, then
// prints the prompt for one module and the harness for the whole model.
#include <iostream>

#include "protosynth/harness_emit.hpp"
#include "protosynth/prompt_forge.hpp"

int main() {
  using namespace protosynth;
  Type record_type = Type::enumeration("RecordType", {"A", "AAAA", "NS", "TXT", "CNAME", "DNAME", "SOA"});
  Type record = Type::composite("Record", {{"record_type", record_type}, {"name", Type::text(3)}, {"rdata", Type::text(3)}});
  ArgSpec query{"query", Type::text(5), "A DNS query domain name."};
  ArgSpec rec{"record", record, "A DNS record."};
  ArgSpec result{"result", Type::boolean(), "If the DNS record matches the query."};

  auto valid_query = ProtocolModule::regex("[a-z*](\\.[a-z*])*", query);
  auto dname_applies = ProtocolModule::function("dname_applies", "If a DNAME record matches a query.", {query, rec, result});
  auto record_applies = ProtocolModule::function("record_applies", "If a DNS record matches a query.", {query, rec, result});

  GraphBuilder b;
  b.pipe(valid_query, record_applies);
  b.call_edge(record_applies, {dname_applies});
  SynthesisPlan plan = synthesize_plan(b.build());

  std::cout << make_prompt(plan, "dname_applies").user << "\n\n" << emit_harness(plan).text;
  return 0;
}
