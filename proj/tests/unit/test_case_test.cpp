#include "protosynth/test_case.hpp"

#include <gtest/gtest.h>

#include <random>
#include <set>

#include "protosynth/harness_emit.hpp"
#include "reference_models.hpp"

using namespace protosynth;
namespace ref = protosynth::testing;

namespace {

SymbolMap dns_map() {
  auto h = emit_harness(synthesize_plan(ref::dns_graph()));
  h.symbols.model_id = "sample-00";
  return h.symbols;
}

std::vector<std::uint8_t> text(const std::string& s, std::size_t width) {
  std::vector<std::uint8_t> b(s.begin(), s.end());
  b.resize(width, 0);
  return b;
}

KTest dns_ktest(const std::string& query, std::uint32_t rtype, const std::string& name, const std::string& rdata,
                std::uint8_t result, std::uint8_t invalid) {
  KTest t;
  t.args = {"model.bc"};
  t.objects = {{"x0", text(query, 6)},
               {"x1", {static_cast<std::uint8_t>(rtype), 0, 0, 0}},
               {"x2", text(name, 4)},
               {"x3", text(rdata, 4)},
               {"x4", {result}},
               {"x5", {invalid}}};
  return t;
}

TestCase make_dns(const std::string& q, const std::string& rt, const std::string& name, const std::string& rdata,
                  bool invalid = false) {
  TestCase t;
  t.inputs = {{"query", ref::dns_query_arg().type, q},
              {"record", ref::dns_record(), Json{{"record_type", rt}, {"name", name}, {"rdata", rdata}}}};
  t.output = TypedValue{"result", Type::boolean(), true};
  t.invalid = invalid;
  return t;
}

}  // namespace

TEST(Reconstruct, DecodesDnameWitness) {
  auto r = reconstruct(dns_map(), dns_ktest("a.*", 5, "*", "a.a", 1, 0), "test000001.ktest");
  ASSERT_TRUE(r.test) << r.discard_reason;
  const auto& t = *r.test;
  EXPECT_EQ(t.inputs[0].name, "query");
  EXPECT_EQ(t.inputs[0].value, "a.*");
  EXPECT_EQ(t.inputs[1].value, (Json{{"record_type", "DNAME"}, {"name", "*"}, {"rdata", "a.a"}}));
  EXPECT_EQ(t.output->value, true);
  EXPECT_FALSE(t.invalid);
  EXPECT_EQ(t.model_id, "sample-00");
  EXPECT_EQ(t.test_file, "test000001.ktest");
  EXPECT_EQ(t.args_list(), (Json::array({"a.*", Json{{"record_type", "DNAME"}, {"name", "*"}, {"rdata", "a.a"}}, true})));
}

TEST(Reconstruct, TextStopsAtFirstNul) {
  auto k = dns_ktest("a", 0, "b", "c", 0, 0);
  k.objects[0].bytes = {'a', 0, 'z', 'z', 0, 0};
  auto r = reconstruct(dns_map(), k);
  ASSERT_TRUE(r.test);
  EXPECT_EQ(r.test->inputs[0].value, "a");
}

TEST(Reconstruct, ValidityFlagMarksInvalid) {
  auto r = reconstruct(dns_map(), dns_ktest("..", 0, "a", "b", 0, 1));
  ASSERT_TRUE(r.test);
  EXPECT_TRUE(r.test->invalid);
}

TEST(Reconstruct, OutOfRangeEnumIsDiscarded) {
  auto r = reconstruct(dns_map(), dns_ktest("a", 7, "a", "b", 0, 0));
  EXPECT_FALSE(r.test);
  EXPECT_FALSE(r.discard_reason.empty());
}

TEST(Reconstruct, NonBooleanByteIsDiscarded) {
  EXPECT_FALSE(reconstruct(dns_map(), dns_ktest("a", 0, "a", "b", 2, 0)).test);
}

TEST(Reconstruct, UnterminatedTextIsDiscarded) {
  auto k = dns_ktest("a", 0, "b", "c", 0, 0);
  k.objects[2].bytes = {'a', 'b', 'c', 'd'};
  EXPECT_FALSE(reconstruct(dns_map(), k).test);
}

TEST(Reconstruct, MissingObjectThrows) {
  auto k = dns_ktest("a", 0, "b", "c", 0, 0);
  k.objects.pop_back();
  EXPECT_THROW(reconstruct(dns_map(), k), ReconstructError);
}

TEST(Reconstruct, WidthMismatchThrows) {
  auto k = dns_ktest("a", 0, "b", "c", 0, 0);
  k.objects[1].bytes.pop_back();
  EXPECT_THROW(reconstruct(dns_map(), k), ReconstructError);
}

TEST(Reconstruct, EncodeIsExactInverse) {
  auto map = dns_map();
  std::mt19937 rng(11);
  const std::string alphabet = "ab*.";
  auto word = [&](std::size_t max) {
    std::string s;
    for (std::size_t i = 0, n = rng() % (max + 1); i < n; ++i) s += alphabet[rng() % alphabet.size()];
    return s;
  };
  for (int i = 0; i < 500; ++i) {
    auto k = dns_ktest(word(5), rng() % 7, word(3), word(3), rng() % 2, rng() % 2);
    auto r = reconstruct(map, k);
    ASSERT_TRUE(r.test) << r.discard_reason;
    auto bytes = encode(map, *r.test);
    for (const auto& o : k.objects) EXPECT_EQ(bytes.at(o.name), o.bytes) << o.name;
    KTest again;
    for (const auto& [name, b] : bytes) again.objects.push_back({name, b});
    auto r2 = reconstruct(map, again);
    ASSERT_TRUE(r2.test);
    EXPECT_EQ(r2.test->to_json(), r.test->to_json());
  }
}

TEST(Reconstruct, NonPrintableTextUsesHexForm) {
  auto k = dns_ktest("a", 0, "b", "c", 0, 0);
  k.objects[0].bytes = {0x01, 'a', 0, 0, 0, 0};
  auto r = reconstruct(dns_map(), k);
  ASSERT_TRUE(r.test);
  EXPECT_EQ(r.test->inputs[0].value, (Json{{"bytes_hex", "0161"}}));
  EXPECT_EQ(text_bytes(r.test->inputs[0].value), std::string("\x01" "a"));
  EXPECT_EQ(encode(dns_map(), *r.test).at("x0"), k.objects[0].bytes);
}

TEST(TestCaseJson, RoundTrip) {
  auto t = make_dns("a.*", "DNAME", "*", "a.a");
  t.id = "t0001";
  t.model_id = "sample-03";
  t.test_file = "test000002.ktest";
  auto back = TestCase::from_json(t.to_json());
  EXPECT_EQ(back.to_json(), t.to_json());
  EXPECT_EQ(back.inputs, t.inputs);
}

TEST(Dedup, KeepsFirstOccurrenceAndIgnoresOutputAndOrigin) {
  auto a = make_dns("a", "A", "a", "b");
  auto b = a;
  b.output->value = false;
  b.model_id = "sample-01";
  auto c = make_dns("a", "A", "a", "b", true);
  auto out = dedup_union({a, b, c});
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].output->value, true);
  EXPECT_TRUE(out[1].invalid);
}

TEST(Dedup, MonotoneOverPrefixesAndIdempotent) {
  std::mt19937 rng(3);
  const std::vector<std::string> names = {"a", "b", "*", "a.b"};
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::vector<TestCase>> models(1 + rng() % 8);
    for (auto& m : models) {
      for (unsigned i = 0, n = rng() % 6; i < n; ++i) {
        m.push_back(make_dns(names[rng() % 4], "DNAME", names[rng() % 4], "a", rng() % 4 == 0));
      }
    }
    std::set<std::string> prev;
    std::vector<TestCase> all;
    for (const auto& m : models) {
      all.insert(all.end(), m.begin(), m.end());
      auto u = dedup_union(all);
      std::set<std::string> keys;
      for (const auto& t : u) keys.insert(dedup_key(t));
      EXPECT_EQ(keys.size(), u.size());
      EXPECT_TRUE(std::includes(keys.begin(), keys.end(), prev.begin(), prev.end()));
      std::vector<std::string> k1, k2;
      for (const auto& t : u) k1.push_back(dedup_key(t));
      for (const auto& t : dedup_union(u)) k2.push_back(dedup_key(t));
      EXPECT_EQ(k1, k2);
      prev = keys;
    }
  }
}

TEST(Export, DropsInvalidAndNumbers) {
  auto tests = std::vector<TestCase>{make_dns("a", "A", "a", "b"), make_dns("b", "A", "a", "b", true),
                                     make_dns("c", "A", "a", "b")};
  auto out = export_suite(tests, false);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].id, "t0001");
  EXPECT_EQ(out[1].id, "t0002");
  EXPECT_EQ(out[1].inputs[0].value, "c");
  EXPECT_EQ(export_suite(tests, true).size(), 3u);
}

TEST(Export, SuiteJsonRoundTrip) {
  TestSuite s{"dns", "abc", export_suite({make_dns("a", "A", "a", "b")}, false)};
  auto back = TestSuite::from_json(s.to_json());
  EXPECT_EQ(back.to_json(), s.to_json());
}
