#include "protosynth/state_driver.hpp"

#include <algorithm>
#include <deque>
#include <map>

#include "protosynth/prompt_forge.hpp"

namespace protosynth {

std::optional<std::string> StateGraph::next(const std::string& state, const std::string& input) const {
  for (const auto& t : transitions) {
    if (t.from == state && t.input == input) return t.to;
  }
  return std::nullopt;
}

bool StateGraph::has_state(const std::string& s) const { return std::find(states.begin(), states.end(), s) != states.end(); }

std::vector<std::string> StateGraph::validate() const {
  std::vector<std::string> v;
  if (!has_state(initial)) v.push_back("initial state '" + initial + "' is not a state");
  for (const auto& t : transitions) {
    if (!has_state(t.from)) v.push_back("transition source '" + t.from + "' is not a state");
    if (!has_state(t.to)) v.push_back("transition target '" + t.to + "' is not a state");
  }
  return v;
}

Json StateGraph::to_json() const {
  Json j{{"initial", initial}, {"states", states}};
  j["transitions"] = Json::array();
  for (const auto& t : transitions) j["transitions"].push_back(Json{{"from", t.from}, {"input", t.input}, {"to", t.to}});
  return j;
}

StateGraph StateGraph::from_json(const Json& j) {
  StateGraph g;
  g.initial = j.at("initial").get<std::string>();
  g.states = j.at("states").get<std::vector<std::string>>();
  for (const auto& t : j.at("transitions")) {
    g.transitions.push_back({t.at("from").get<std::string>(), t.at("input").get<std::string>(), t.at("to").get<std::string>()});
  }
  if (auto v = g.validate(); !v.empty()) throw ValidationError(v);
  return g;
}

namespace {

class DictParser {
 public:
  explicit DictParser(std::string_view s) : s_(s) {}

  std::vector<Transition> run() {
    expect('{');
    std::vector<Transition> out;
    skip();
    if (peek() == '}') return out;
    while (true) {
      skip();
      if (peek() != '(') fail("expected a (state, input) tuple key");
      ++pos_;
      std::string from = string_literal("state");
      expect(',');
      std::string input = string_literal("input");
      skip();
      if (peek() == ',') ++pos_;
      expect(')');
      expect(':');
      std::string to = string_literal("target state");
      out.push_back({from, input, to});
      skip();
      if (peek() == ',') {
        ++pos_;
        skip();
        if (peek() == '}') break;
        continue;
      }
      if (peek() == '}') break;
      fail("expected ',' or '}'");
    }
    return out;
  }

 private:
  [[noreturn]] void fail(const std::string& why) const {
    throw ParseError("transition dictionary at offset " + std::to_string(pos_) + ": " + why);
  }

  char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }

  void skip() {
    while (pos_ < s_.size()) {
      char c = s_[pos_];
      if (c == '#') {
        while (pos_ < s_.size() && s_[pos_] != '\n') ++pos_;
      } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
        ++pos_;
      } else {
        break;
      }
    }
  }

  void expect(char c) {
    skip();
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  std::string string_literal(const char* what) {
    skip();
    char q = peek();
    if (q != '"' && q != '\'') {
      if (q == '`') fail(std::string("unsupported quoting for ") + what);
      fail(std::string(what) + " must be a string literal");
    }
    ++pos_;
    std::string out;
    while (true) {
      if (pos_ >= s_.size()) fail("unterminated string");
      char c = s_[pos_++];
      if (c == q) break;
      if (c == '\n') fail("newline inside string");
      if (c == '\\') {
        if (pos_ >= s_.size()) fail("unterminated escape");
        char e = s_[pos_++];
        switch (e) {
          case 'n':
            out += '\n';
            break;
          case 'r':
            out += '\r';
            break;
          case 't':
            out += '\t';
            break;
          default:
            out += e;
        }
        continue;
      }
      out += c;
    }
    return out;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

// Outermost balanced brace span, ignoring braces inside string literals.
std::string_view outer_literal(std::string_view text) {
  std::size_t start = std::string_view::npos;
  int depth = 0;
  char quote = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (quote) {
      if (c == '\\') {
        ++i;
      } else if (c == quote || c == '\n') {
        quote = 0;
      }
      continue;
    }
    if (start != std::string_view::npos && (c == '"' || c == '\'')) {
      quote = c;
    } else if (c == '{') {
      if (depth++ == 0) start = i;
    } else if (c == '}' && depth > 0) {
      if (--depth == 0) return text.substr(start, i - start + 1);
    }
  }
  throw ParseError("no dictionary literal found");
}

std::string py_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') {
      out += '\\';
      out += c;
    } else if (c == '\n') {
      out += "\\n";
    } else if (c == '\t') {
      out += "\\t";
    } else if (c == '\r') {
      out += "\\r";
    } else {
      out += c;
    }
  }
  return out + "\"";
}

}  // namespace

StateGraph parse_transition_dict(std::string_view completion, const std::vector<std::string>& state_order) {
  auto raw = DictParser(outer_literal(completion)).run();
  StateGraph g;
  for (const auto& t : raw) {
    auto it = std::find_if(g.transitions.begin(), g.transitions.end(),
                           [&](const Transition& x) { return x.from == t.from && x.input == t.input; });
    if (it != g.transitions.end()) {
      it->to = t.to;
    } else {
      g.transitions.push_back(t);
    }
  }
  for (const auto& t : g.transitions) {
    for (const auto* s : {&t.from, &t.to}) {
      if (!g.has_state(*s)) g.states.push_back(*s);
    }
  }
  if (g.states.empty()) throw ParseError("transition dictionary is empty");
  if (g.has_state("INITIAL")) {
    g.initial = "INITIAL";
  } else if (!state_order.empty()) {
    g.initial = state_order.front();
    if (!g.has_state(g.initial)) g.states.insert(g.states.begin(), g.initial);
  } else {
    g.initial = g.states.front();
  }
  return g;
}

std::string render_transition_dict(const StateGraph& g) {
  std::string out = "{\n";
  for (const auto& t : g.transitions) {
    out += "    (" + py_quote(t.from) + ", " + py_quote(t.input) + "): " + py_quote(t.to) + ",\n";
  }
  return out + "}\n";
}

std::vector<std::string> input_prefix(const StateGraph& g, const std::string& target) {
  if (!g.has_state(target)) throw Error("unknown state '" + target + "'");
  std::map<std::string, std::pair<std::string, std::string>> parent;  // state -> (previous, input)
  std::deque<std::string> queue{g.initial};
  std::map<std::string, bool> seen{{g.initial, true}};
  while (!queue.empty() && !seen.contains(target)) {
    auto s = queue.front();
    queue.pop_front();
    for (const auto& t : g.transitions) {
      if (t.from != s || seen.contains(t.to)) continue;
      seen[t.to] = true;
      parent[t.to] = {s, t.input};
      queue.push_back(t.to);
    }
  }
  if (!seen.contains(target)) throw UnreachableState("state '" + target + "' is unreachable from " + g.initial);
  std::vector<std::string> path;
  for (std::string s = target; s != g.initial; s = parent[s].first) path.push_back(parent[s].second);
  std::reverse(path.begin(), path.end());
  return path;
}

std::optional<std::string> replay(const StateGraph& g, const std::vector<std::string>& inputs) {
  std::string s = g.initial;
  for (const auto& in : inputs) {
    auto n = g.next(s, in);
    if (!n) return std::nullopt;
    s = *n;
  }
  return s;
}

StateGraph extract_state_graph(const std::string& model_source, CompletionBackend& backend,
                               const GenerationConfig& cfg, const std::vector<std::string>& state_order) {
  // The code-writing system prompt would fight the dictionary format.
  PromptPair prompt{"", render_state_graph_prompt(model_source), "state_graph"};
  std::string raw;
  try {
    raw = backend.complete(prompt, 0.0, 0, cfg);
  } catch (const Error& e) {
    throw StateGraphError(std::string("state graph request failed: ") + e.what(), "");
  }
  try {
    auto g = parse_transition_dict(raw, state_order);
    if (auto v = g.validate(); !v.empty()) throw ParseError(v.front());
    return g;
  } catch (const ParseError& e) {
    throw StateGraphError(std::string("cannot parse state graph reply: ") + e.what(), raw);
  }
}

}  // namespace protosynth
