#include "protosynth/triage.hpp"

#include <algorithm>
#include <map>

#include "protosynth/error.hpp"

namespace protosynth {

Response Response::ok(Json fields) {
  Response r;
  r.fields = Json{{"status", "OK"}};
  for (auto it = fields.begin(); it != fields.end(); ++it) {
    if (it.key() != "status") r.fields[it.key()] = it.value();
  }
  return r;
}

Response Response::crash(std::string detail) {
  Response r;
  r.fields = Json{{"status", "CRASH"}};
  r.detail = std::move(detail);
  return r;
}

Response Response::timeout(std::string detail) {
  Response r;
  r.fields = Json{{"status", "TIMEOUT"}};
  r.detail = std::move(detail);
  return r;
}

std::string Response::status() const { return fields.value("status", "OK"); }

Json Response::to_json() const {
  Json j{{"fields", fields}};
  if (!detail.empty()) j["detail"] = detail;
  return j;
}

Response Response::from_json(const Json& j) {
  Response r;
  r.fields = j.at("fields");
  r.detail = j.value("detail", "");
  return r;
}

std::string value_text(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return "<absent>";
  return v.dump();
}

namespace {

std::vector<std::string> field_keys(const Json& a, const Json& b) {
  std::vector<std::string> keys;
  for (auto it = a.begin(); it != a.end(); ++it) keys.push_back(it.key());
  for (auto it = b.begin(); it != b.end(); ++it) {
    if (!a.contains(it.key())) keys.push_back(it.key());
  }
  return keys;
}

Json field_of(const Json& o, const std::string& k) { return o.contains(k) ? o.at(k) : Json(nullptr); }

void diff_into(std::vector<TriageTuple>& out, const std::string& adapter, const Response& observed,
               const Response& reference, const std::optional<std::string>& versus) {
  for (const auto& k : field_keys(reference.fields, observed.fields)) {
    Json a = field_of(observed.fields, k), b = field_of(reference.fields, k);
    if (a != b) out.push_back({adapter, k, value_text(a), value_text(b), versus});
  }
}

}  // namespace

TestTriage majority_and_triage(const std::vector<std::pair<std::string, Response>>& responses,
                               const std::string& test_id) {
  if (responses.size() < 2) throw Error("triage needs at least two responses, got " + std::to_string(responses.size()));
  // Groups keyed by canonical text so the result does not depend on order.
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < responses.size(); ++i) groups[responses[i].second.fields.dump()].push_back(i);

  std::size_t best = 0, best_count = 0;
  for (const auto& [key, members] : groups) {
    if (members.size() > best) {
      best = members.size();
      best_count = 1;
    } else if (members.size() == best) {
      ++best_count;
    }
  }

  TestTriage t;
  t.test_id = test_id;
  if (best_count == 1) {
    const std::vector<std::size_t>* maj = nullptr;
    for (const auto& [key, members] : groups) {
      if (members.size() == best) maj = &members;
    }
    const Response& ref = responses[maj->front()].second;
    for (auto i : *maj) t.majority.push_back(responses[i].first);
    for (std::size_t i = 0; i < responses.size(); ++i) {
      if (std::find(maj->begin(), maj->end(), i) != maj->end()) continue;
      diff_into(t.tuples, responses[i].first, responses[i].second, ref, std::nullopt);
    }
  } else {
    t.no_majority = true;
    for (std::size_t i = 0; i < responses.size(); ++i) {
      for (std::size_t j = 0; j < responses.size(); ++j) {
        if (i == j || responses[i].second == responses[j].second) continue;
        diff_into(t.tuples, responses[i].first, responses[i].second, responses[j].second, responses[j].first);
      }
    }
  }
  std::sort(t.majority.begin(), t.majority.end());
  std::sort(t.tuples.begin(), t.tuples.end());
  return t;
}

TriageReport aggregate_report(const std::vector<TestTriage>& triages, std::size_t witness_cap) {
  TriageReport r;
  r.tests = triages.size();
  std::map<TriageTuple, std::size_t> index;
  for (const auto& t : triages) {
    if (t.no_majority) r.no_majority_tests.push_back(t.test_id);
    for (const auto& tup : t.tuples) {
      auto [it, inserted] = index.emplace(tup, r.groups.size());
      if (inserted) r.groups.push_back(TriageGroup{tup, 0, {}});
      auto& g = r.groups[it->second];
      ++g.count;
      if (g.witnesses.size() < witness_cap &&
          (g.witnesses.empty() || g.witnesses.back() != t.test_id)) {
        g.witnesses.push_back(t.test_id);
      }
    }
  }
  std::stable_sort(r.groups.begin(), r.groups.end(),
                   [](const TriageGroup& a, const TriageGroup& b) { return a.count > b.count; });
  return r;
}

Json TriageReport::to_json() const {
  Json j{{"tests", tests}, {"skipped", skipped}};
  j["groups"] = Json::array();
  for (const auto& g : groups) {
    Json t{{"adapter", g.tuple.adapter},
           {"field", g.tuple.field},
           {"observed", g.tuple.observed},
           {"majority", g.tuple.majority}};
    if (g.tuple.versus) t["versus"] = *g.tuple.versus;
    j["groups"].push_back(Json{{"tuple", t}, {"count", g.count}, {"witnesses", g.witnesses}});
  }
  j["no_majority_tests"] = no_majority_tests;
  j["notes"] = notes;
  return j;
}

namespace {

std::string md_cell(std::string s) {
  std::string out;
  for (char c : s) {
    if (c == '|') {
      out += "\\|";
    } else if (c == '\n') {
      out += ' ';
    } else {
      out += c;
    }
  }
  return out.size() > 120 ? out.substr(0, 117) + "..." : out;
}

}  // namespace

std::string TriageReport::to_markdown() const {
  std::string md = "# Differential test triage\n\n";
  md += std::to_string(tests) + " tests compared, " + std::to_string(skipped) + " skipped, " +
        std::to_string(groups.size()) + " unique disagreements, " + std::to_string(no_majority_tests.size()) +
        " without a majority.\n\n";
  if (!groups.empty()) {
    md += "| adapter | field | observed | compared with | versus | tests | witnesses |\n";
    md += "|---|---|---|---|---|---|---|\n";
    for (const auto& g : groups) {
      std::string w;
      for (const auto& x : g.witnesses) w += (w.empty() ? "" : ", ") + x;
      md += "| " + md_cell(g.tuple.adapter) + " | " + md_cell(g.tuple.field) + " | " + md_cell(g.tuple.observed) +
            " | " + md_cell(g.tuple.majority) + " | " + md_cell(g.tuple.versus.value_or("majority")) + " | " +
            std::to_string(g.count) + " | " + w + " |\n";
    }
    md += "\n";
  }
  if (!notes.empty()) {
    md += "## Notes\n\n";
    for (const auto& n : notes) md += "- " + md_cell(n) + "\n";
  }
  return md;
}

}  // namespace protosynth
