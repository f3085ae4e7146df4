#include "protosynth/triage.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "protosynth/error.hpp"

using namespace protosynth;

namespace {

using Responses = std::vector<std::pair<std::string, Response>>;

Response rcode(const std::string& r) { return Response::ok(Json{{"rcode", r}, {"answer", Json::array()}}); }

// Brute-force oracle: every adapter whose response differs from the
// majority response yields one tuple per differing key.
std::vector<TriageTuple> oracle(const Responses& rs) {
  std::map<std::string, std::vector<std::string>> groups;
  for (const auto& [id, r] : rs) groups[r.fields.dump()].push_back(id);
  std::size_t best = 0, ties = 0;
  std::string best_key;
  for (const auto& [k, ids] : groups) {
    if (ids.size() > best) best = ids.size(), ties = 1, best_key = k;
    else if (ids.size() == best) ++ties;
  }
  std::vector<TriageTuple> out;
  if (ties != 1) return out;
  Json maj = Json::parse(best_key);
  for (const auto& [id, r] : rs) {
    if (r.fields == maj) continue;
    std::set<std::string> keys;
    for (auto it = r.fields.begin(); it != r.fields.end(); ++it) keys.insert(it.key());
    for (auto it = maj.begin(); it != maj.end(); ++it) keys.insert(it.key());
    for (const auto& k : keys) {
      Json a = r.fields.contains(k) ? r.fields.at(k) : Json(nullptr);
      Json b = maj.contains(k) ? maj.at(k) : Json(nullptr);
      if (a != b) out.push_back({id, k, value_text(a), value_text(b), std::nullopt});
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST(Triage, SingleDissenterGivesExactlyOneTuple) {
  Responses rs = {{"bind", rcode("NOERROR")},
                  {"coredns", rcode("NOERROR")},
                  {"adapter", rcode("NXDOMAIN")},
                  {"knot", rcode("NOERROR")},
                  {"nsd", rcode("NOERROR")}};
  auto t = majority_and_triage(rs, "t0001");
  EXPECT_FALSE(t.no_majority);
  EXPECT_EQ(t.majority, (std::vector<std::string>{"bind", "coredns", "knot", "nsd"}));
  ASSERT_EQ(t.tuples.size(), 1u);
  EXPECT_EQ(t.tuples[0], (TriageTuple{"adapter", "rcode", "NXDOMAIN", "NOERROR", std::nullopt}));
}

TEST(Triage, AllAgreeGivesNothing) {
  Responses rs = {{"a", rcode("NOERROR")}, {"b", rcode("NOERROR")}, {"c", rcode("NOERROR")}};
  auto t = majority_and_triage(rs);
  EXPECT_FALSE(t.no_majority);
  EXPECT_TRUE(t.tuples.empty());
  EXPECT_EQ(t.majority.size(), 3u);
}

TEST(Triage, EvenSplitHasNoMajority) {
  Responses rs = {{"a", rcode("NOERROR")}, {"b", rcode("NOERROR")}, {"c", rcode("NXDOMAIN")}, {"d", rcode("NXDOMAIN")}};
  auto t = majority_and_triage(rs);
  EXPECT_TRUE(t.no_majority);
  EXPECT_TRUE(t.majority.empty());
  ASSERT_FALSE(t.tuples.empty());
  // Pairwise diffs in both directions.
  EXPECT_NE(std::find(t.tuples.begin(), t.tuples.end(), TriageTuple{"a", "rcode", "NOERROR", "NXDOMAIN", "c"}),
            t.tuples.end());
  EXPECT_NE(std::find(t.tuples.begin(), t.tuples.end(), TriageTuple{"c", "rcode", "NXDOMAIN", "NOERROR", "a"}),
            t.tuples.end());
}

TEST(Triage, DetailIsNotCompared) {
  Responses rs = {{"a", Response::crash("segfault")}, {"b", Response::crash("abort")}, {"c", rcode("NOERROR")}};
  auto t = majority_and_triage(rs);
  EXPECT_EQ(t.majority, (std::vector<std::string>{"a", "b"}));
  ASSERT_FALSE(t.tuples.empty());
  EXPECT_EQ(t.tuples[0].adapter, "c");
}

TEST(Triage, MissingFieldIsAbsent) {
  Responses rs = {{"a", Response::ok({{"x", 1}})}, {"b", Response::ok({{"x", 1}})}, {"c", Response::ok({{"y", 1}})}};
  auto t = majority_and_triage(rs);
  EXPECT_EQ(t.tuples, (std::vector<TriageTuple>{{"c", "x", "<absent>", "1", std::nullopt},
                                                {"c", "y", "1", "<absent>", std::nullopt}}));
}

TEST(Triage, FewerThanTwoThrows) {
  EXPECT_THROW(majority_and_triage({{"a", rcode("NOERROR")}}), Error);
}

TEST(Triage, MatchesOracleAndIsPermutationInvariant) {
  std::mt19937 rng(5);
  const std::vector<std::string> codes = {"NOERROR", "NXDOMAIN", "SERVFAIL"};
  for (int trial = 0; trial < 400; ++trial) {
    Responses rs;
    std::size_t n = 2 + rng() % 5;
    for (std::size_t i = 0; i < n; ++i) {
      Json f{{"rcode", codes[rng() % 3]}};
      if (rng() % 2) f["flags"] = rng() % 2 ? "aa qr" : "qr";
      rs.emplace_back("s" + std::to_string(i), Response::ok(f));
    }
    auto t = majority_and_triage(rs);
    if (!t.no_majority) {
      EXPECT_EQ(t.tuples, oracle(rs));
      // Bounded by (adapters - majority) * fields.
      EXPECT_LE(t.tuples.size(), (n - t.majority.size()) * 3);
    }
    auto shuffled = rs;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    auto t2 = majority_and_triage(shuffled);
    EXPECT_EQ(t2.tuples, t.tuples);
    EXPECT_EQ(t2.majority, t.majority);
    EXPECT_EQ(t2.no_majority, t.no_majority);
  }
}

TEST(Triage, AggregateGroupsAndCapsWitnesses) {
  std::vector<TestTriage> ts;
  for (int i = 0; i < 15; ++i) {
    Responses rs = {{"a", rcode("NOERROR")}, {"b", rcode("NOERROR")}, {"bad", rcode(i < 12 ? "NXDOMAIN" : "SERVFAIL")}};
    ts.push_back(majority_and_triage(rs, "t" + std::to_string(i)));
  }
  auto r = aggregate_report(ts, 10);
  EXPECT_EQ(r.tests, 15u);
  ASSERT_EQ(r.groups.size(), 2u);
  EXPECT_EQ(r.groups[0].count, 12u);
  EXPECT_EQ(r.groups[0].tuple.observed, "NXDOMAIN");
  EXPECT_EQ(r.groups[0].witnesses.size(), 10u);
  EXPECT_EQ(r.groups[1].count, 3u);
  EXPECT_TRUE(r.has_findings());
  EXPECT_NE(r.to_markdown().find("NXDOMAIN"), std::string::npos);
  EXPECT_EQ(r.to_json()["groups"].size(), 2u);
}

TEST(Triage, ResponseJsonRoundTrip) {
  auto r = Response::timeout("no reply");
  auto back = Response::from_json(r.to_json());
  EXPECT_EQ(back, r);
  EXPECT_EQ(back.detail, "no reply");
  EXPECT_EQ(back.status(), "TIMEOUT");
}
