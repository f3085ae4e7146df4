#include "protosynth/harness_emit.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <set>

#include "golden.hpp"
#include "protosynth/assets.hpp"
#include "protosynth/prompt_forge.hpp"
#include "reference_models.hpp"

using namespace protosynth;
namespace ref = protosynth::testing;
namespace fs = std::filesystem;

namespace {

SynthesisPlan dns_plan() { return synthesize_plan(ref::dns_graph()); }

std::map<std::string, std::string> dns_completions() {
  auto dir = ref::fixture_dir() / "completions" / "dns";
  auto plan = dns_plan();
  std::map<std::string, std::string> out;
  for (const auto& m : plan.function_modules()) {
    out[m] = sanitize_completion(util::read_file(dir / (m + ".c")), plan, m);
  }
  return out;
}

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = text.find(needle); p != std::string::npos; p = text.find(needle, p + 1)) ++n;
  return n;
}

// Syntax-checks a program with the host C compiler and the declarations-only
// engine header. Returns false when no compiler is available.
bool host_syntax_check(const std::string& program, std::string& diagnostics) {
  if (std::system("command -v clang >/dev/null 2>&1") != 0) return false;
  auto dir = fs::temp_directory_path() / ("ps_harness_" + std::to_string(::getpid()));
  fs::create_directories(dir / "klee");
  util::write_file(dir / "klee" / "klee.h", assets::klee_shim());
  util::write_file(dir / "model.c", program);
  std::string cmd = "clang -std=c11 -fsyntax-only -Wall -Werror -Wno-unused-function -I" + dir.string() + " " +
                    (dir / "model.c").string() + " > " + (dir / "diag.txt").string() + " 2>&1";
  int rc = std::system(cmd.c_str());
  diagnostics = util::read_file(dir / "diag.txt");
  fs::remove_all(dir);
  if (rc != 0 && diagnostics.empty()) diagnostics = "compiler exited with " + std::to_string(rc);
  return rc == 0 || !diagnostics.empty();
}

}  // namespace

TEST(HarnessGolden, DnsPlan) {
  auto h = emit_harness(dns_plan());
  EXPECT_TRUE(ref::matches_golden("harness_dns.c", h.text));
}

TEST(HarnessStructure, DnsPlanShape) {
  auto text = emit_harness(dns_plan()).text;
  for (const char* v : {"x0", "x1", "x2", "x3", "x4", "x5"}) {
    EXPECT_NE(text.find(std::string("\"") + v + "\""), std::string::npos) << v;
  }
  EXPECT_NE(text.find("bool result_tmp; bool x4;"), std::string::npos);
  EXPECT_NE(text.find("bool bad_input; bool x5;"), std::string::npos);
  EXPECT_NE(text.find("if (valid_query(x0)) {"), std::string::npos);
  EXPECT_NE(text.find("result_tmp = record_applies(x0, arg1);"), std::string::npos);
  EXPECT_NE(text.find("} else {\n        bad_input = true;\n        result_tmp = false;\n    }"), std::string::npos);
  EXPECT_TRUE(text.ends_with("    klee_assume(result_tmp == x4);\n    klee_assume(bad_input == x5);\n    return 0;\n}\n"));
}

TEST(HarnessStructure, UngatedPlanHasNoValidityFlag) {
  auto plan = synthesize_plan(ref::smtp_graph());
  auto h = emit_harness(plan);
  EXPECT_EQ(h.text.find("bad_input"), std::string::npos);
  EXPECT_EQ(h.symbols.validity(), nullptr);
  EXPECT_NE(h.text.find("char* result_tmp;"), std::string::npos);
  EXPECT_NE(h.text.find("ps_capture_text(result_tmp, x2, sizeof(x2));"), std::string::npos);
  EXPECT_NE(h.text.find("klee_assume((unsigned)x0 < 7u);"), std::string::npos);
}

TEST(HarnessStructure, OddWidthIntegersAreBounded) {
  auto m = ProtocolModule::function("f", "F.", {{"a", Type::uint(5), "a"}, {"r", Type::boolean(), "r"}});
  auto plan = synthesize_plan(GraphBuilder().add(m).build());
  auto text = emit_harness(plan).text;
  EXPECT_NE(text.find("klee_assume(x0 < 32u);"), std::string::npos);
}

TEST(HarnessStructure, NonPrintableOptionRelaxesText) {
  auto text = emit_harness(dns_plan(), HarnessOptions{false}).text;
  EXPECT_NE(text.find("ps_assume_text(x0, sizeof(x0), 0);"), std::string::npos);
}

TEST(SymbolMap, CoversEveryFlattenedSlotOnce) {
  for (const auto& plan : {dns_plan(), synthesize_plan(ref::smtp_graph()), synthesize_plan(ref::bgp_graph())}) {
    auto h = emit_harness(plan);
    std::set<std::string> vars;
    std::size_t inputs = 0, outputs = 0, flags = 0;
    for (const auto& e : h.symbols.entries) {
      EXPECT_TRUE(vars.insert(e.slot.var_name).second) << e.slot.var_name;
      EXPECT_EQ(count(h.text, "\"" + e.slot.var_name + "\""), 1u) << e.slot.var_name;
      inputs += e.role == SlotRole::input;
      outputs += e.role == SlotRole::output;
      flags += e.role == SlotRole::validity;
    }
    std::size_t expected_inputs = 0;
    for (std::size_t i = 0; i < h.symbols.inputs.size(); ++i) {
      expected_inputs += flatten(i, h.symbols.inputs[i].type, 0).size();
    }
    EXPECT_EQ(inputs, expected_inputs);
    EXPECT_EQ(outputs, flatten(0, h.symbols.output->type, 0).size());
    EXPECT_EQ(flags, plan.gates.empty() ? 0u : 1u);
    EXPECT_EQ(count(h.text, "klee_make_symbolic("), h.symbols.entries.size());
  }
}

TEST(SymbolMap, JsonRoundTrip) {
  auto h = emit_harness(synthesize_plan(ref::bgp_graph()));
  h.symbols.model_id = "sample-03";
  auto j = h.symbols.to_json();
  auto back = SymbolMap::from_json(j);
  EXPECT_EQ(back.to_json(), j);
  EXPECT_EQ(back.model_id, "sample-03");
  EXPECT_EQ(back.inputs, h.symbols.inputs);
}

TEST(RegexFunction, DnsGate) {
  auto text = emit_regex_function(dns_plan(), "valid_query");
  EXPECT_TRUE(util::starts_with(text, "bool valid_query(char* query) {\n"));
  EXPECT_NE(text.find("    return match(&r10, query);\n}"), std::string::npos);
}

TEST(Assemble, DnsProgramOrder) {
  auto model = assemble_program(dns_plan(), dns_completions(), 3);
  const auto& p = model.program_text;
  EXPECT_EQ(model.id, "sample-03");
  EXPECT_EQ(model.symbol_map.model_id, "sample-03");
  auto at = [&](const std::string& s) { return p.find(s); };
  ASSERT_NE(at("typedef char String[4];"), std::string::npos);
  EXPECT_EQ(count(p, "typedef char String[4];"), 1u);
  EXPECT_LT(at("typedef char String[4];"), at("static int match("));
  EXPECT_LT(at("static int match("), at("bool valid_query(char* query) {"));
  EXPECT_LT(at("bool valid_query(char* query) {"), at("bool dname_applies(char* query, Record record) {"));
  EXPECT_LT(at("bool dname_applies(char* query, Record record) {"), at("bool record_applies(char* query, Record record) {"));
  EXPECT_LT(at("bool record_applies(char* query, Record record) {"), at("int main() {"));
  // The callee prototype is redundant once the definition precedes it.
  EXPECT_EQ(at("bool dname_applies(char* query, Record record);"), std::string::npos);
  EXPECT_EQ(count(p, "#include <string.h>"), 1u);
}

TEST(Assemble, ProvenanceNamesOrigins) {
  auto model = assemble_program(dns_plan(), dns_completions());
  std::map<std::string, std::string> origin;
  for (const auto& f : model.provenance) origin[f.function] = f.origin;
  EXPECT_EQ(origin["match"], "runtime");
  EXPECT_EQ(origin["valid_query"], "regex");
  EXPECT_EQ(origin["dname_applies"], "completion:dname_applies");
  EXPECT_EQ(origin["label_match"], "completion:record_applies");
  EXPECT_EQ(origin["record_applies"], "completion:record_applies");
}

TEST(Assemble, DropsCompletionMain) {
  auto c = dns_completions();
  c["dname_applies"] += "\nint main() { return 0; }\n";
  auto model = assemble_program(dns_plan(), c);
  EXPECT_EQ(count(model.program_text, "int main()"), 1u);
  ASSERT_EQ(model.notes.size(), 1u);
  EXPECT_NE(model.notes[0].find("main"), std::string::npos);
}

TEST(Assemble, DuplicateHelperNamesBothSites) {
  auto c = dns_completions();
  c["dname_applies"] += "\nstatic bool label_match(const char* q, const char* p) { return q == p; }\n";
  try {
    assemble_program(dns_plan(), c);
    FAIL() << "expected AssemblyError";
  } catch (const AssemblyError& e) {
    std::string msg = e.what();
    EXPECT_NE(msg.find("label_match"), std::string::npos);
    EXPECT_NE(msg.find("completion of dname_applies"), std::string::npos);
    EXPECT_NE(msg.find("completion of record_applies"), std::string::npos);
  }
}

TEST(Assemble, RedefiningRuntimeIsRejected) {
  auto c = dns_completions();
  c["record_applies"] += "\nint match(void* r, const char* t) { return 0; }\n";
  EXPECT_THROW(assemble_program(dns_plan(), c), AssemblyError);
}

TEST(Assemble, MissingCompletionIsRejected) {
  auto c = dns_completions();
  c.erase("dname_applies");
  EXPECT_THROW(assemble_program(dns_plan(), c), AssemblyError);
}

TEST(Assemble, SameHarnessAcrossSamples) {
  auto a = assemble_program(dns_plan(), dns_completions(), 0);
  auto b = assemble_program(dns_plan(), dns_completions(), 7);
  auto main_of = [](const std::string& p) { return p.substr(p.find("int main() {")); };
  EXPECT_EQ(main_of(a.program_text), main_of(b.program_text));
}

TEST(Assemble, ProgramPassesHostSyntaxCheck) {
  auto model = assemble_program(dns_plan(), dns_completions());
  std::string diag;
  if (!host_syntax_check(model.program_text, diag)) GTEST_SKIP() << "no host C compiler";
  EXPECT_EQ(diag, "") << model.program_text;
}

TEST(EmitAll, SkipsFailedIndices) {
  auto plan = dns_plan();
  auto c = dns_completions();
  std::map<std::string, SampleSet> samples;
  samples["dname_applies"].samples = {{0, c["dname_applies"]}, {1, c["dname_applies"]}, {2, "no code here"}};
  samples["record_applies"].samples = {{0, c["record_applies"]}, {2, c["record_applies"]}};
  samples["record_applies"].failures = {{1, "HTTP 500"}};
  auto r = emit_all(plan, samples, 3);
  ASSERT_EQ(r.models.size(), 1u);
  EXPECT_EQ(r.models[0].id, "sample-00");
  ASSERT_EQ(r.skipped.size(), 2u);
  EXPECT_EQ(r.skipped[0].index, 1);
  EXPECT_NE(r.skipped[0].reason.find("HTTP 500"), std::string::npos);
  EXPECT_EQ(r.skipped[1].index, 2);
}

TEST(EmitAll, AllFailedThrows) {
  std::map<std::string, SampleSet> samples;
  samples["dname_applies"].failures = {{0, "timeout"}};
  samples["record_applies"].failures = {{0, "timeout"}};
  EXPECT_THROW(emit_all(dns_plan(), samples, 1), Error);
}

TEST(WriteModel, WritesThreeFiles) {
  auto model = assemble_program(dns_plan(), dns_completions());
  auto dir = fs::temp_directory_path() / ("ps_write_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  write_model(model, dir);
  EXPECT_EQ(util::read_file(dir / "model.c"), model.program_text);
  auto sym = Json::parse(util::read_file(dir / "symbols.json"));
  EXPECT_EQ(sym["model_id"], "sample-00");
  auto prov = Json::parse(util::read_file(dir / "provenance.json"));
  EXPECT_TRUE(prov["completions"].contains("record_applies"));
  fs::remove_all(dir);
}
