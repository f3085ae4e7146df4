#include "protosynth/manifest.hpp"

#include "protosynth/type_json.hpp"
#include "protosynth/util.hpp"

namespace protosynth {

namespace fs = std::filesystem;

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_relative() && !base.empty() ? base / path : path;
}

// Runs `f`, turning its failure into a violation prefixed by `where`.
template <typename F>
void collect(std::vector<std::string>& v, const std::string& where, F&& f) {
  try {
    f();
  } catch (const ValidationError& e) {
    for (const auto& x : e.violations()) v.push_back(where + ": " + x);
  } catch (const std::exception& e) {
    v.push_back(where + ": " + e.what());
  }
}

ArgSpec arg_from_json(const Json& j, const std::map<std::string, Type>& named) {
  if (!j.is_object()) throw ValidationError({"argument must be an object"});
  if (!j.contains("name") || !j.contains("type")) throw ValidationError({"argument needs name and type"});
  return ArgSpec{j.at("name").get<std::string>(), type_from_json(j.at("type"), named), j.value("description", "")};
}

std::vector<ArgSpec> args_from_json(const Json& j, const std::map<std::string, Type>& named) {
  if (!j.is_array()) throw ValidationError({"args must be a list"});
  std::vector<ArgSpec> out;
  for (const auto& a : j) out.push_back(arg_from_json(a, named));
  return out;
}

ProtocolModule module_from_json(const Json& j, const std::map<std::string, Type>& named, const fs::path& base) {
  std::string kind = j.value("kind", "function");
  if (kind == "function") {
    return ProtocolModule::function(j.at("name").get<std::string>(), j.value("description", ""),
                                    args_from_json(j.at("args"), named));
  }
  if (kind == "regex") {
    return ProtocolModule::regex(j.at("pattern").get<std::string>(), arg_from_json(j.at("subject"), named),
                                 j.value("name", ""));
  }
  if (kind == "native") {
    NativeModule m;
    m.name = j.at("name").get<std::string>();
    m.prototype = j.at("prototype").get<std::string>();
    m.description = j.value("description", "");
    if (j.contains("body_file")) {
      m.body = util::read_file(resolve(base, j.at("body_file").get<std::string>()));
    } else {
      m.body = j.at("body").get<std::string>();
    }
    if (j.contains("args")) m.args = args_from_json(j.at("args"), named);
    return ProtocolModule::native(std::move(m));
  }
  throw ValidationError({"unknown module kind '" + kind + "'"});
}

}  // namespace

GenerationConfig generation_from_json(const Json& j) {
  GenerationConfig g;
  if (j.is_null()) return g;
  g.k = j.value("k", g.k);
  g.temperature = j.value("temperature", g.temperature);
  g.max_output_tokens = j.value("max_output_tokens", g.max_output_tokens);
  if (j.contains("request_timeout")) g.request_timeout = util::parse_duration(j.at("request_timeout").get<std::string>());
  g.retries = j.value("retries", g.retries);
  if (auto v = g.validate(); !v.empty()) throw ValidationError(v);
  return g;
}

BackendConfig backend_from_json(const Json& j, const fs::path& base) {
  BackendConfig b;
  if (j.is_null()) return b;
  std::string kind = j.value("kind", "stub");
  if (kind == "stub") {
    b.kind = BackendConfig::Kind::stub;
    if (!j.contains("fixtures")) throw ValidationError({"stub backend needs a fixtures directory"});
    b.fixtures = resolve(base, j.at("fixtures").get<std::string>());
  } else if (kind == "remote") {
    b.kind = BackendConfig::Kind::remote;
    b.endpoint = j.value("endpoint", "");
    b.model = j.value("model", "");
    b.api_key_env = j.value("api_key_env", b.api_key_env);
    std::vector<std::string> v;
    if (b.endpoint.empty()) v.push_back("remote backend needs an endpoint");
    if (b.model.empty()) v.push_back("remote backend needs a model");
    if (!v.empty()) throw ValidationError(v);
  } else {
    throw ValidationError({"backend kind must be stub or remote, got '" + kind + "'"});
  }
  return b;
}

EngineConfig engine_from_json(const Json& j, const fs::path& base) {
  EngineConfig e;
  if (j.is_null()) return e;
  e.runtime = j.value("runtime", e.runtime);
  if (e.runtime.rfind("fixture:", 0) == 0 && e.runtime.size() > 8) {
    e.runtime = "fixture:" + resolve(base, e.runtime.substr(8)).string();
  }
  e.image = j.value("image", e.image);
  e.clang = j.value("clang", e.clang);
  e.klee = j.value("klee", e.klee);
  if (j.contains("klee_include")) e.klee_include = j.at("klee_include").get<std::string>();
  if (j.contains("timeout")) {
    e.timeout = std::chrono::duration_cast<std::chrono::seconds>(util::parse_duration(j.at("timeout").get<std::string>()));
  }
  if (j.contains("extra_flags")) e.extra_flags = j.at("extra_flags").get<std::vector<std::string>>();
  e.keep_invalid = j.value("keep_invalid", false);
  e.validate();
  return e;
}

Manifest parse_manifest(const Json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw ValidationError({"manifest must be a JSON object"});
  Manifest m;
  m.base_dir = j.contains("base_dir") ? fs::path(j.at("base_dir").get<std::string>()) : base_dir;
  m.raw = j;
  m.raw["base_dir"] = fs::absolute(m.base_dir).lexically_normal().string();
  std::vector<std::string> v;
  m.name = j.value("name", "");
  if (m.name.empty()) v.push_back("name is required");

  std::map<std::string, Type> named;
  if (j.contains("types")) {
    if (!j.at("types").is_object()) {
      v.push_back("types must be an object");
    } else {
      for (auto it = j.at("types").begin(); it != j.at("types").end(); ++it) {
        collect(v, "types." + it.key(), [&] {
          Json t = it.value();
          if (t.is_object() && !t.contains("name")) t["name"] = it.key();
          Type ty = type_from_json(t, named);
          if (ty.name() != it.key()) ty = Type::alias(it.key(), ty);
          named.emplace(it.key(), ty);
        });
      }
    }
  }

  std::vector<ProtocolModule> modules;
  if (!j.contains("modules") || !j.at("modules").is_array() || j.at("modules").empty()) {
    v.push_back("modules must be a nonempty list");
  } else {
    for (std::size_t i = 0; i < j.at("modules").size(); ++i) {
      const Json& mj = j.at("modules")[i];
      collect(v, "modules[" + std::to_string(i) + "] " + mj.value("name", ""),
              [&] { modules.push_back(module_from_json(mj, named, m.base_dir)); });
    }
  }
  std::vector<Pipe> pipes;
  for (const auto& p : j.value("pipes", Json::array())) {
    collect(v, "pipes", [&] { pipes.push_back(Pipe{p.at("source").get<std::string>(), p.at("target").get<std::string>()}); });
  }
  std::vector<CallEdge> edges;
  for (const auto& c : j.value("call_edges", Json::array())) {
    collect(v, "call_edges", [&] {
      edges.push_back(CallEdge{c.at("caller").get<std::string>(), c.at("callees").get<std::vector<std::string>>()});
    });
  }
  if (j.contains("main")) m.main = j.at("main").get<std::string>();
  collect(v, "generation", [&] { m.generation = generation_from_json(j.value("generation", Json())); });
  collect(v, "backend", [&] { m.backend = backend_from_json(j.value("backend", Json()), m.base_dir); });
  collect(v, "engine", [&] { m.engine = engine_from_json(j.value("engine", Json()), m.base_dir); });
  collect(v, "protocol", [&] { m.protocol = ProtocolConfig::from_json(j.value("protocol", Json())); });
  if (j.contains("harness")) m.harness.printable = j.at("harness").value("printable", true);
  if (!v.empty()) throw ValidationError(v);

  m.graph = build_graph(std::move(modules), std::move(pipes), std::move(edges));
  m.plan();  // surfaces main-selection errors now
  return m;
}

Manifest load_manifest(const fs::path& path) {
  Json j;
  try {
    j = Json::parse(util::read_file(path));
  } catch (const Json::parse_error& e) {
    throw ValidationError({path.string() + ": " + e.what()});
  }
  return parse_manifest(j, fs::absolute(path).parent_path());
}

}  // namespace protosynth
