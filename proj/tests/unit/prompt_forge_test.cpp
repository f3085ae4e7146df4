#include "protosynth/prompt_forge.hpp"

#include <gtest/gtest.h>

#include "golden.hpp"
#include "reference_models.hpp"

using namespace protosynth;
namespace ref = protosynth::testing;

namespace {

// Lines must appear in this order, each after the previous one.
void expect_in_order(const std::string& text, const std::vector<std::string>& lines) {
  std::size_t pos = 0;
  for (const auto& l : lines) {
    auto at = text.find(l, pos);
    ASSERT_NE(at, std::string::npos) << "missing or out of order: " << l;
    pos = at + l.size();
  }
}

SynthesisPlan dns_plan() { return synthesize_plan(ref::dns_graph()); }
SynthesisPlan smtp_plan() { return synthesize_plan(ref::smtp_graph()); }
SynthesisPlan bgp_plan() { return synthesize_plan(ref::bgp_graph()); }

const char* kDnsCompletion = R"(Here is the implementation:
```c
#include <string.h>

typedef char String[4];

typedef enum {
    A,
    AAAA,
    NS,
    TXT,
    CNAME,
    DNAME,
    SOA
} RecordType;

typedef struct {
    RecordType record_type;
    String name;
    String rdata;
} Record;

bool record_applies(char* query, Record record) {
    if (record.record_type == DNAME) {
        return dname_applies(query, record);
    }
    return strcmp(query, record.name) == 0;
}
```
This handles DNAME records.)";

}  // namespace

TEST(PromptGolden, DnsRecordApplies) {
  auto user = render_user_prompt(dns_plan(), "record_applies");
  EXPECT_TRUE(ref::matches_golden("prompt_dns_record_applies.txt", user));
}

TEST(PromptGolden, SmtpServerResp) {
  auto user = render_user_prompt(smtp_plan(), "smtp_server_resp");
  EXPECT_TRUE(ref::matches_golden("prompt_smtp_server_resp.txt", user));
}

TEST(PromptGolden, BgpPrefixListEntry) {
  auto user = render_user_prompt(bgp_plan(), "isMatchPrefixListEntry");
  EXPECT_TRUE(ref::matches_golden("prompt_bgp_is_match_prefix_list_entry.txt", user));
}

TEST(PromptStructure, DnsPromptCarriesVisibleReferenceLines) {
  auto user = render_user_prompt(dns_plan(), "record_applies");
  EXPECT_TRUE(util::starts_with(user, "#include <stdint.h>\n"));
  expect_in_order(user, {"RecordType record_type;", "String name;", "String rdata;", "} Record;",
                         "// If a DNAME record matches a query.", "bool dname_applies(char* query, Record record);",
                         "// If a DNS record matches a query.\n", "// Parameters:\n",
                         "//     query: A DNS query domain name.\n", "// Return Value:\n",
                         "//     If the DNS record matches the query.\n",
                         "bool record_applies(char* query, Record record) {\n"});
  EXPECT_TRUE(user.ends_with("bool record_applies(char* query, Record record) {\n"));
}

TEST(PromptStructure, SmtpPromptCarriesVisibleReferenceLines) {
  auto user = render_user_prompt(smtp_plan(), "smtp_server_resp");
  expect_in_order(user, {"#include <stdint.h>\n", "#include <stdbool.h>\n", "INITIAL", "QUITTED", "} State;",
                         "// A function that takes the current state of", "//\n// Parameters:\n",
                         "//     state: Current state of the SMTP server\n", "//     input: Input string\n",
                         "// Return Value:\n//     Output string\n", "char* smtp_server_resp(State state, char* input) {\n"});
}

TEST(PromptStructure, BgpPromptListsCalleePrototype) {
  auto user = render_user_prompt(bgp_plan(), "isMatchPrefixListEntry");
  expect_in_order(user, {"#include <stdint.h>\n", "uint32_t prefix;", "uint8_t prefixLength;", "} Route;",
                         "uint32_t le;", "uint32_t ge;", "bool any;", "bool permit;", "} PrefixListEntry;",
                         "//     maskLength: The length of the prefix\n",
                         "//     The unsinged integer representation of the prefix length\n",
                         "uint32_t prefixLengthToSubnetMask(uint32_t maskLength);\n",
                         "//     route: Route to be matched\n", "//     pfe: Prefix list entry\n",
                         "bool isMatchPrefixListEntry(Route route, PrefixListEntry pfe) {\n"});
  // Only direct callees appear.
  EXPECT_EQ(user.find("isValidRoute"), std::string::npos);
}

TEST(PromptStructure, DocCommentsWrapAtOneHundredColumns) {
  for (const auto& plan : {dns_plan(), smtp_plan(), bgp_plan()}) {
    for (const auto& m : plan.function_modules()) {
      for (const auto& line : util::split_lines(render_user_prompt(plan, m))) {
        if (util::starts_with(line, "//")) EXPECT_LE(line.size(), 100u) << line;
      }
    }
  }
}

TEST(PromptStructure, RenderingIsPure) {
  auto plan = bgp_plan();
  for (const auto& m : plan.function_modules()) {
    EXPECT_EQ(render_user_prompt(plan, m), render_user_prompt(bgp_plan(), m));
  }
  EXPECT_EQ(render_system_prompt(), render_system_prompt());
}

TEST(SystemPrompt, CarriesTheThreeInstructions) {
  auto sys = render_system_prompt();
  EXPECT_NE(sys.find("Do NOT add a `main()` function"), std::string::npos);
  EXPECT_NE(sys.find("DO NOT USE fenced code blocks"), std::string::npos);
  EXPECT_NE(sys.find("DO NOT USE C strtok function"), std::string::npos);
}

TEST(StateGraphPrompt, EmbedsSourceAndRejectsEmpty) {
  auto p = render_state_graph_prompt("int f(void) { return 1; }");
  EXPECT_NE(p.find("int f(void) { return 1; }"), std::string::npos);
  EXPECT_EQ(p.find("{{MODEL_SOURCE}}"), std::string::npos);
  EXPECT_THROW(render_state_graph_prompt(""), Error);
  EXPECT_THROW(render_state_graph_prompt("  \n"), Error);
}

TEST(MakePrompt, PairsSystemAndUser) {
  auto p = make_prompt(dns_plan(), "dname_applies");
  EXPECT_EQ(p.target_module, "dname_applies");
  EXPECT_EQ(p.system, render_system_prompt());
  EXPECT_EQ(p.user, render_user_prompt(dns_plan(), "dname_applies"));
}

TEST(Sanitize, StripsFencesAndProse) {
  auto s = sanitize_completion(kDnsCompletion, dns_plan(), "record_applies");
  EXPECT_EQ(s.find("```"), std::string::npos);
  EXPECT_EQ(s.find("Here is"), std::string::npos);
  EXPECT_EQ(s.find("This handles"), std::string::npos);
  EXPECT_TRUE(util::starts_with(s, "#include <string.h>"));
  EXPECT_NE(s.find("bool record_applies(char* query, Record record) {"), std::string::npos);
}

TEST(Sanitize, IsIdempotent) {
  auto plan = dns_plan();
  auto once = sanitize_completion(kDnsCompletion, plan, "record_applies");
  EXPECT_EQ(sanitize_completion(once, plan, "record_applies"), once);
}

TEST(Sanitize, RejectsMissingSignature) {
  std::string bad = kDnsCompletion;
  bad.replace(bad.find("bool record_applies(char* query"), 32, "bool record_applies(const char* q");
  try {
    sanitize_completion(bad, dns_plan(), "record_applies");
    FAIL() << "expected SanitizeError";
  } catch (const SanitizeError& e) {
    EXPECT_NE(std::string(e.what()).find("record_applies"), std::string::npos);
  }
}

TEST(Sanitize, RejectsAlteredTypedef) {
  std::string bad = kDnsCompletion;
  bad.replace(bad.find("typedef char String[4];"), 23, "typedef char String[8];");
  try {
    sanitize_completion(bad, dns_plan(), "record_applies");
    FAIL() << "expected SanitizeError";
  } catch (const SanitizeError& e) {
    EXPECT_NE(std::string(e.what()).find("String"), std::string::npos);
  }
}

TEST(Sanitize, RejectsMissingTypedef) {
  std::string bad = kDnsCompletion;
  bad.erase(bad.find("typedef char String[4];"), 23);
  EXPECT_THROW(sanitize_completion(bad, dns_plan(), "record_applies"), SanitizeError);
}

TEST(Sanitize, AcceptsReformattedTypedef) {
  std::string ok = kDnsCompletion;
  ok.replace(ok.find("typedef char String[4];"), 23, "typedef  char   String[ 4 ];");
  EXPECT_NO_THROW(sanitize_completion(ok, dns_plan(), "record_applies"));
}
