#include "protosynth/dns.hpp"

#include <gtest/gtest.h>

#include "protosynth/error.hpp"
#include "reference_models.hpp"

using namespace protosynth;
using namespace protosynth::dns;
namespace ref = protosynth::testing;

namespace {

TestCase dns_test(const std::string& query, const std::string& rtype, const std::string& name,
                  const std::string& rdata) {
  TestCase t;
  t.id = "t0001";
  t.inputs = {{"query", ref::dns_query_arg().type, query},
              {"record", ref::dns_record(), Json{{"record_type", rtype}, {"name", name}, {"rdata", rdata}}}};
  t.output = TypedValue{"result", Type::boolean(), true};
  return t;
}

std::vector<std::string> lines_of(const Zone& z) {
  std::vector<std::string> out;
  for (const auto& r : z.records) out.push_back(name_to_text(r.owner) + " " + r.type + " " + r.rdata);
  return out;
}

}  // namespace

TEST(DnsNames, ParseAndRender) {
  EXPECT_EQ(parse_name("a.*.test."), (Name{"a", "*", "test"}));
  EXPECT_EQ(parse_name("a", parse_name("test.")), (Name{"a", "test"}));
  EXPECT_EQ(parse_name("@", parse_name("test.")), (Name{"test"}));
  EXPECT_EQ(parse_name("."), Name{});
  EXPECT_EQ(name_to_text({}), ".");
  EXPECT_EQ(name_to_text({"a b", "test"}), "a\\032b.test.");
  EXPECT_EQ(parse_name("a\\032b.test."), (Name{"a b", "test"}));
  EXPECT_EQ(parse_name("a\\.b.test."), (Name{"a.b", "test"}));
  EXPECT_THROW(parse_name("a..test."), ParseError);
  EXPECT_THROW(parse_name(std::string(64, 'a') + "."), ParseError);
  EXPECT_EQ(wire_length({"a", "test"}), 8u);
  EXPECT_TRUE(is_subdomain({"a", "b", "test"}, {"b", "test"}));
  EXPECT_TRUE(is_subdomain({"test"}, {"TEST"}));
  EXPECT_FALSE(is_subdomain({"b", "test"}, {"a", "b", "test"}));
}

TEST(DnsCodes, TypesAndRcodes) {
  EXPECT_EQ(type_code("DNAME"), 39);
  EXPECT_EQ(type_code("AAAA"), 28);
  EXPECT_EQ(type_name(5), "CNAME");
  EXPECT_EQ(type_name(99), "TYPE99");
  EXPECT_EQ(rcode_name(3), "NXDOMAIN");
  EXPECT_EQ(rcode_value("REFUSED"), 5);
}

TEST(Postprocess, DnameExampleZoneAndQuery) {
  auto s = postprocess_dns(dns_test("a.*", "DNAME", "*", "a.a"));
  auto lines = lines_of(s.zone);
  ASSERT_EQ(lines.size(), 3u);
  EXPECT_EQ(lines[0].rfind("test. SOA ", 0), 0u);
  EXPECT_EQ(lines[1], "test. NS ns1.outside.edu.");
  EXPECT_EQ(lines[2], "*.test. DNAME a.a.test.");
  EXPECT_EQ(name_to_text(s.query.name), "a.*.test.");
  EXPECT_EQ(s.query.type, "CNAME");
}

TEST(Postprocess, EmptyRecordGivesApexOnly) {
  TestCase t;
  t.inputs = {{"query", ref::dns_query_arg().type, "a"}};
  auto s = postprocess_dns(t);
  ASSERT_EQ(s.zone.records.size(), 2u);
  EXPECT_EQ(s.zone.records[0].type, "SOA");
  EXPECT_EQ(s.zone.records[1].type, "NS");
}

TEST(Postprocess, OverlongNameAfterSuffixingIsAnError) {
  std::string l63(63, 'a');
  std::string q = l63 + "." + l63 + "." + l63 + "." + std::string(58, 'b');
  EXPECT_NO_THROW(parse_name(q + "."));
  TestCase t;
  t.inputs = {{"query", Type::text(300), q}};
  EXPECT_THROW(postprocess_dns(t), Error);
}

TEST(Postprocess, EmptyLabelIsAnError) { EXPECT_THROW(postprocess_dns(dns_test("a..b", "A", "a", "b")), Error); }

TEST(Postprocess, ScenarioJsonRoundTrip) {
  auto s = postprocess_dns(dns_test("a.*", "DNAME", "*", "a.a"));
  auto back = Scenario::from_json(s.to_json());
  EXPECT_EQ(back.zone.to_text(), s.zone.to_text());
  EXPECT_EQ(back.query.name, s.query.name);
  EXPECT_EQ(back.query.type, s.query.type);
}

TEST(Zone, TextRoundTrip) {
  auto s = postprocess_dns(dns_test("a.*", "TXT", "b", "x y"));
  auto text = s.zone.to_text();
  EXPECT_NE(text.find("$ORIGIN test."), std::string::npos);
  auto z = parse_zone(text);
  EXPECT_EQ(lines_of(z), lines_of(s.zone));
  EXPECT_EQ(z.to_text(), text);
}

TEST(Zone, ParsesTtlClassCommentsAndRelativeNames) {
  auto z = parse_zone(
      "$ORIGIN example.\n"
      "; comment\n"
      "@ 3600 IN SOA ns1 host 1 2 3 4 5\n"
      "www IN 60 A 192.0.2.1 ; trailing\n"
      "alias CNAME www\n");
  auto lines = lines_of(z);
  ASSERT_EQ(lines.size(), 3u);
  EXPECT_EQ(z.records[0].ttl, 3600u);
  EXPECT_EQ(lines[0], "example. SOA ns1.example. host.example. 1 2 3 4 5");
  EXPECT_EQ(lines[1], "www.example. A 192.0.2.1");
  EXPECT_EQ(z.records[1].ttl, 60u);
  EXPECT_EQ(lines[2], "alias.example. CNAME www.example.");
}

TEST(Wire, RoundTripAllEmittedTypes) {
  Message m;
  m.id = 0xbeef;
  m.qr = m.aa = m.rd = true;
  m.rcode = 3;
  m.qname = parse_name("a.*.test.");
  m.qtype = type_code("CNAME");
  m.answer = {{parse_name("*.test."), 39, 1, 300, "a.a.test."},
              {parse_name("a.*.test."), 5, 1, 300, "a.a.a.test."},
              {parse_name("x.test."), 1, 1, 60, "192.0.2.7"},
              {parse_name("x.test."), 28, 1, 60, "2001:db8::1"},
              {parse_name("x.test."), 16, 1, 60, "\"hello world\""},
              {parse_name("x.test."), 15, 1, 60, "10 mail.test."}};
  m.authority = {{parse_name("test."), 6, 1, 300, "ns1.outside.edu. hostmaster.test. 1 3600 600 86400 300"},
                 {parse_name("test."), 2, 1, 300, "ns1.outside.edu."}};
  auto d = decode_message(encode_message(m));
  EXPECT_EQ(d.id, m.id);
  EXPECT_TRUE(d.qr && d.aa && d.rd && !d.ra && !d.tc);
  EXPECT_EQ(d.rcode, 3);
  EXPECT_EQ(d.qname, m.qname);
  EXPECT_EQ(d.qtype, m.qtype);
  ASSERT_EQ(d.answer.size(), m.answer.size());
  for (std::size_t i = 0; i < m.answer.size(); ++i) {
    EXPECT_EQ(d.answer[i].owner, m.answer[i].owner);
    EXPECT_EQ(d.answer[i].type, m.answer[i].type);
    EXPECT_EQ(d.answer[i].rdata, m.answer[i].rdata) << i;
  }
  EXPECT_EQ(normalize(d), normalize(m));
}

TEST(Wire, DecodesCompressionPointers) {
  // Response for a.test. A with the answer owner compressed to offset 12.
  std::vector<std::uint8_t> b = {0x00, 0x01, 0x84, 0x00, 0x00, 0x01, 0x00, 0x01, 0x00, 0x00, 0x00, 0x00,
                                 1,    'a',  4,    't',  'e',  's',  't',  0,    0x00, 0x01, 0x00, 0x01,
                                 0xc0, 0x0c, 0x00, 0x01, 0x00, 0x01, 0x00, 0x00, 0x00, 0x3c, 0x00, 0x04,
                                 192,  0,    2,    9};
  auto m = decode_message(b);
  EXPECT_TRUE(m.qr);
  EXPECT_TRUE(m.aa);
  ASSERT_EQ(m.answer.size(), 1u);
  EXPECT_EQ(m.answer[0].owner, (Name{"a", "test"}));
  EXPECT_EQ(m.answer[0].rdata, "192.0.2.9");
  EXPECT_EQ(m.answer[0].ttl, 60u);
}

TEST(Wire, RejectsMalformed) {
  EXPECT_THROW(decode_message(std::vector<std::uint8_t>{0, 1, 2}), ParseError);
  // Self-referencing compression pointer.
  std::vector<std::uint8_t> loop = {0, 1, 0x80, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0xc0, 0x0c, 0, 1, 0, 1};
  EXPECT_THROW(decode_message(loop), ParseError);
}

TEST(Normalize, CanonicalAndIdempotent) {
  Message m;
  m.qr = m.aa = true;
  m.answer = {{parse_name("B.test."), 5, 1, 1, "X.test."}, {parse_name("a.test."), 1, 1, 2, "192.0.2.1"}};
  auto n = normalize(m);
  EXPECT_EQ(n["rcode"], "NOERROR");
  EXPECT_EQ(n["answer"], (Json::array({"a.test. A 192.0.2.1", "b.test. CNAME x.test."})));
  EXPECT_EQ(normalize_fields(n), n);
  Message m2 = m;
  std::swap(m2.answer[0], m2.answer[1]);
  m2.answer[0].ttl = 999;
  EXPECT_EQ(normalize(m2), n);
}
