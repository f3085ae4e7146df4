#include "protosynth/engine.hpp"

#include <algorithm>

#include "protosynth/assets.hpp"
#include "protosynth/error.hpp"
#include "protosynth/process.hpp"
#include "protosynth/util.hpp"

namespace protosynth {

namespace fs = std::filesystem;

namespace {

constexpr const char* kFixturePrefix = "fixture:";
constexpr const char* kContainerWork = "/work";
constexpr const char* kImageKleeInclude = "/home/klee/klee_src/include";
// Extra wall time the engine gets to flush its test files after --max-time.
constexpr std::chrono::seconds kGrace{60};

std::string tail(const std::string& s, std::size_t n = 4000) { return s.size() <= n ? s : s.substr(s.size() - n); }

// Wraps `argv` for the configured runtime with `workdir` mounted.
std::vector<std::string> wrap(const EngineConfig& cfg, const fs::path& workdir, std::vector<std::string> argv) {
  if (!cfg.is_container()) return argv;
  std::vector<std::string> out{cfg.runtime, "run", "--rm", "--network=none", "-v",
                               fs::absolute(workdir).string() + ":" + kContainerWork, "-w", kContainerWork, cfg.image};
  out.insert(out.end(), argv.begin(), argv.end());
  return out;
}

void check_environment(const ProcessResult& r, const EngineConfig& cfg, const std::string& tool) {
  if (cfg.is_container()) {
    if (r.not_found) throw EnvironmentError("container runtime '" + cfg.runtime + "' not found on PATH");
    if (r.exit_code == 125) {
      throw EnvironmentError("container image '" + cfg.image + "' could not be started: " + util::trim(tail(r.err, 600)));
    }
    if (r.exit_code == 126 || r.exit_code == 127) {
      throw EnvironmentError("'" + tool + "' is not available in container image '" + cfg.image + "'");
    }
  } else if (r.not_found) {
    throw EnvironmentError("'" + tool + "' not found on PATH (set engine.runtime to docker or podman to use the image '" +
                           cfg.image + "')");
  }
}

}  // namespace

std::optional<fs::path> EngineConfig::fixture_dir() const {
  if (!util::starts_with(runtime, kFixturePrefix)) return std::nullopt;
  return fs::path(runtime.substr(std::string(kFixturePrefix).size()));
}

void EngineConfig::validate() const {
  std::vector<std::string> v;
  if (!is_container() && runtime != "local" && !fixture_dir()) {
    v.push_back("engine.runtime must be docker, podman, local or fixture:<dir>, got '" + runtime + "'");
  }
  if (auto d = fixture_dir(); d && d->empty()) v.push_back("engine.runtime fixture: needs a directory");
  if (timeout.count() <= 0) v.push_back("engine.timeout must be positive");
  if (!v.empty()) throw ValidationError(v);
}

std::vector<std::string> engine_flags(std::chrono::seconds timeout) {
  return {"--libc=uclibc", "--posix-runtime", "--max-time=" + std::to_string(timeout.count()) + "s",
          "--external-calls=all"};
}

CompileResult compile_bitcode(const GeneratedModel& model, const fs::path& workdir, const EngineConfig& cfg) {
  fs::create_directories(workdir);
  if (!fs::exists(workdir / "model.c")) util::write_file(workdir / "model.c", model.program_text);
  std::string include;
  if (cfg.klee_include) {
    include = *cfg.klee_include;
  } else if (cfg.is_container()) {
    include = kImageKleeInclude;
  } else {
    fs::create_directories(workdir / "include" / "klee");
    util::write_file(workdir / "include" / "klee" / "klee.h", assets::klee_shim());
    include = fs::absolute(workdir / "include").string();
  }
  CompileResult res;
  res.command = wrap(cfg, workdir,
                     {cfg.clang, "-I", include, "-emit-llvm", "-c", "-g", "-O0", "-Xclang", "-disable-O0-optnone",
                      "model.c", "-o", "model.bc"});
  ProcessOptions opt;
  opt.cwd = workdir;
  opt.timeout = std::chrono::minutes(5);
  auto r = run_process(res.command, opt);
  check_environment(r, cfg, cfg.clang);
  res.diagnostics = r.err;
  res.ok = r.exit_code == 0 && !r.timed_out && fs::exists(workdir / "model.bc");
  if (r.timed_out) res.diagnostics += "\ncompiler timed out";
  if (res.ok) res.bitcode = workdir / "model.bc";
  return res;
}

std::vector<fs::path> list_ktests(const fs::path& dir) {
  std::vector<fs::path> out;
  if (!fs::is_directory(dir)) return out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".ktest") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

EngineRunReport run_engine(const std::string& model_id, const fs::path& bitcode, const fs::path& test_dir,
                           const EngineConfig& cfg) {
  EngineRunReport rep;
  rep.model_id = model_id;
  fs::create_directories(test_dir);

  if (auto fixtures = cfg.fixture_dir()) {
    fs::path src = fs::is_directory(*fixtures / model_id) ? *fixtures / model_id : *fixtures;
    if (!fs::is_directory(src)) throw EnvironmentError("fixture directory " + src.string() + " does not exist");
    rep.command = {"fixture", src.string()};
    for (const auto& f : list_ktests(src)) fs::copy_file(f, test_dir / f.filename(), fs::copy_options::overwrite_existing);
    rep.test_count = list_ktests(test_dir).size();
    return rep;
  }

  // The engine refuses to reuse an existing output directory.
  fs::path workdir = bitcode.parent_path();
  fs::path out_name = "klee-out";
  fs::remove_all(workdir / out_name);
  std::vector<std::string> argv{cfg.klee};
  for (auto& f : engine_flags(cfg.timeout)) argv.push_back(std::move(f));
  argv.push_back("--output-dir=" + out_name.string());
  argv.insert(argv.end(), cfg.extra_flags.begin(), cfg.extra_flags.end());
  argv.push_back(bitcode.filename().string());
  rep.command = wrap(cfg, workdir, argv);

  ProcessOptions opt;
  opt.cwd = workdir;
  opt.timeout = cfg.timeout + kGrace;
  auto r = run_process(rep.command, opt);
  check_environment(r, cfg, cfg.klee);
  rep.exit_status = r.exit_code;
  rep.wall_seconds = r.wall_seconds;
  rep.stderr_text = tail(r.err);
  rep.timeout_hit = r.timed_out || r.err.find("HaltTimer invoked") != std::string::npos ||
                    r.wall_seconds >= static_cast<double>(cfg.timeout.count());
  for (const auto& f : list_ktests(workdir / out_name)) {
    fs::copy_file(f, test_dir / f.filename(), fs::copy_options::overwrite_existing);
  }
  rep.test_count = list_ktests(test_dir).size();
  return rep;
}

Json EngineRunReport::to_json() const {
  return Json{{"model_id", model_id},
              {"compiled", compiled},
              {"compile_diagnostics", compile_diagnostics},
              {"test_count", test_count},
              {"exit_status", exit_status},
              {"wall_seconds", wall_seconds},
              {"timeout_hit", timeout_hit},
              {"stderr", stderr_text},
              {"command", command},
              {"reconstructed", reconstructed},
              {"discarded", discarded}};
}

EngineRunReport EngineRunReport::from_json(const Json& j) {
  EngineRunReport r;
  r.model_id = j.value("model_id", "");
  r.compiled = j.value("compiled", true);
  r.compile_diagnostics = j.value("compile_diagnostics", "");
  r.test_count = j.value("test_count", std::size_t{0});
  r.exit_status = j.value("exit_status", 0);
  r.wall_seconds = j.value("wall_seconds", 0.0);
  r.timeout_hit = j.value("timeout_hit", false);
  r.stderr_text = j.value("stderr", "");
  if (j.contains("command")) r.command = j.at("command").get<std::vector<std::string>>();
  r.reconstructed = j.value("reconstructed", std::size_t{0});
  if (j.contains("discarded")) r.discarded = j.at("discarded").get<std::vector<std::string>>();
  return r;
}

}  // namespace protosynth
