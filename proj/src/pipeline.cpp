#include "protosynth/pipeline.hpp"

#include <atomic>
#include <cstdio>
#include <ctime>
#include <ostream>
#include <thread>

#include "protosynth/ktest.hpp"
#include "protosynth/prompt_forge.hpp"
#include "protosynth/util.hpp"

namespace protosynth {

namespace fs = std::filesystem;

namespace {

void write_json(const fs::path& p, const Json& j) { util::write_file(p, j.dump(2) + "\n"); }

Json read_json(const fs::path& p) {
  if (!fs::exists(p)) throw Error("missing " + p.string());
  try {
    return Json::parse(util::read_file(p));
  } catch (const Json::parse_error& e) {
    throw ParseError(p.string() + ": " + e.what());
  }
}

std::vector<fs::path> model_dirs(const fs::path& run_dir) {
  std::vector<fs::path> out;
  if (fs::is_directory(run_dir / "models")) {
    for (const auto& e : fs::directory_iterator(run_dir / "models")) {
      if (e.is_directory() && fs::exists(e.path() / "symbols.json")) out.push_back(e.path());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

int sample_index_of(const std::string& model_id) {
  auto dash = model_id.rfind('-');
  try {
    return std::stoi(model_id.substr(dash == std::string::npos ? 0 : dash + 1));
  } catch (const std::exception&) {
    return 0;
  }
}

// Runs f(i) for i in [0, n) on up to `jobs` threads; rethrows the first failure.
template <typename F>
void parallel_for(std::size_t n, unsigned jobs, F&& f) {
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(n)));
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  auto worker = [&] {
    for (std::size_t i; (i = next++) < n;) {
      try {
        f(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> threads;
  for (unsigned t = 1; t < jobs; ++t) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::optional<ArgSpec> state_arg(const SynthesisPlan& plan, const ProtocolConfig& protocol) {
  std::string wanted = protocol.options.value("state_arg", "");
  for (const auto& a : plan.main_module().inputs()) {
    if (wanted.empty() ? a.type.resolved().is<Type::Enumeration>() : a.name == wanted) return a;
  }
  return std::nullopt;
}

}  // namespace

fs::path create_run_dir(const fs::path& out) {
  std::time_t now = std::time(nullptr);
  std::tm tm{};
  ::localtime_r(&now, &tm);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y%m%d-%H%M%S", &tm);
  fs::create_directories(out / "runs");
  std::string name = stamp;
  for (int n = 1; fs::exists(out / "runs" / name); ++n) name = std::string(stamp) + "-" + std::to_string(n);
  fs::create_directories(out / "runs" / name);
  util::write_file(out / "LATEST", name + "\n");
  return out / "runs" / name;
}

fs::path resolve_workspace(const fs::path& path) {
  if (fs::exists(path / "manifest.json")) return path;
  if (fs::exists(path / "LATEST")) {
    auto run = path / "runs" / util::trim(util::read_file(path / "LATEST"));
    if (fs::exists(run / "manifest.json")) return run;
  }
  throw ValidationError({"no workspace at " + path.string() + " (expected manifest.json or LATEST)"});
}

Manifest load_workspace_manifest(const fs::path& run_dir) { return parse_manifest(read_json(run_dir / "manifest.json"), {}); }

SynthResult run_synth(const Manifest& manifest, const SynthOptions& options, std::ostream& log) {
  GenerationConfig gen = manifest.generation;
  if (options.k) gen.k = *options.k;
  if (options.temperature) gen.temperature = *options.temperature;
  if (auto v = gen.validate(); !v.empty()) throw ValidationError(v);
  auto backend = make_backend(options.backend.value_or(manifest.backend));
  const SynthesisPlan plan = manifest.plan();

  SynthResult res;
  res.run_dir = options.run_dir ? *options.run_dir : create_run_dir(options.out);
  fs::create_directories(res.run_dir);
  write_json(res.run_dir / "manifest.json", manifest.raw);
  util::write_file(res.run_dir / "plan.json", plan.serialize() + "\n");

  std::map<std::string, SampleSet> samples;
  Json failures = Json::object();
  util::write_file(res.run_dir / "prompts" / "system.txt", render_system_prompt());
  for (const auto& module : plan.function_modules()) {
    auto prompt = make_prompt(plan, module);
    util::write_file(res.run_dir / "prompts" / (module + ".txt"), prompt.user);
    log << "synth: sampling " << gen.k << " completion(s) for " << module << " from " << backend->describe() << "\n";
    samples[module] = sample_k(*backend, prompt, gen);
    failures[module] = Json::array();
    for (const auto& f : samples[module].failures) {
      log << "synth: " << module << " sample " << f.index << " failed: " << f.message << "\n";
      failures[module].push_back(Json{{"index", f.index}, {"message", f.message}});
    }
  }

  auto emitted = emit_all(plan, samples, gen.k, manifest.harness);
  Json skipped = Json::array();
  for (const auto& s : emitted.skipped) {
    log << "synth: skipping sample " << s.index << ": " << s.reason << "\n";
    skipped.push_back(Json{{"index", s.index}, {"reason", s.reason}});
  }
  for (const auto& m : emitted.models) {
    write_model(m, res.run_dir / "models" / m.id);
    res.model_ids.push_back(m.id);
  }
  res.skipped = emitted.skipped;
  write_json(res.run_dir / "synth.json", Json{{"k", gen.k},
                                              {"temperature", gen.temperature},
                                              {"backend", backend->describe()},
                                              {"plan_fingerprint", plan.fingerprint()},
                                              {"models", res.model_ids},
                                              {"skipped", skipped},
                                              {"failures", failures}});
  log << "synth: wrote " << res.model_ids.size() << " model(s) to " << res.run_dir.string() << "\n";
  return res;
}

GenTestsResult run_gen_tests(const fs::path& run_dir, const GenTestsOptions& options, std::ostream& log) {
  const Manifest manifest = load_workspace_manifest(run_dir);
  EngineConfig cfg = manifest.engine;
  if (options.runtime) cfg.runtime = *options.runtime;
  if (options.timeout) cfg.timeout = *options.timeout;
  if (options.keep_invalid) cfg.keep_invalid = *options.keep_invalid;
  cfg.validate();
  const SynthesisPlan plan = manifest.plan();

  auto dirs = model_dirs(run_dir);
  if (dirs.empty()) throw Error("no models in " + (run_dir / "models").string() + "; run synth first");
  GenTestsResult res;
  res.models.resize(dirs.size());
  std::mutex log_mutex;
  auto say = [&](const std::string& s) {
    std::lock_guard<std::mutex> lock(log_mutex);
    log << s << "\n";
  };

  unsigned jobs = options.jobs ? options.jobs : std::max(1u, std::thread::hardware_concurrency());
  parallel_for(dirs.size(), jobs, [&](std::size_t i) {
    const fs::path& dir = dirs[i];
    GeneratedModel gm;
    gm.id = dir.filename().string();
    gm.program_text = util::read_file(dir / "model.c");
    gm.symbol_map = SymbolMap::from_json(read_json(dir / "symbols.json"));
    ModelTests& mt = res.models[i];
    mt.model_id = gm.id;
    fs::remove_all(dir / "ktests");

    fs::path bitcode;
    if (!cfg.fixture_dir()) {
      auto cr = compile_bitcode(gm, dir, cfg);
      if (!cr.ok) {
        mt.report.model_id = gm.id;
        mt.report.compiled = false;
        mt.report.compile_diagnostics = cr.diagnostics;
        mt.report.command = cr.command;
        write_json(dir / "report.json", mt.report.to_json());
        say("gen-tests: skipping " + gm.id + ": compile error (see report.json)");
        return;
      }
      bitcode = cr.bitcode;
    }
    mt.report = run_engine(gm.id, bitcode, dir / "ktests", cfg);
    for (const auto& f : list_ktests(dir / "ktests")) {
      try {
        auto r = reconstruct(gm.symbol_map, read_ktest(f), f.filename().string());
        if (r.test) {
          mt.tests.push_back(std::move(*r.test));
        } else {
          mt.report.discarded.push_back(f.filename().string() + ": " + r.discard_reason);
        }
      } catch (const ParseError& e) {
        mt.report.discarded.push_back(f.filename().string() + ": " + e.what());
      } catch (const ReconstructError& e) {
        mt.report.discarded.push_back(f.filename().string() + ": " + e.what());
      }
    }
    mt.report.reconstructed = mt.tests.size();
    write_json(dir / "report.json", mt.report.to_json());
    say("gen-tests: " + gm.id + ": " + std::to_string(mt.report.test_count) + " test file(s), " +
        std::to_string(mt.tests.size()) + " reconstructed" + (mt.report.timeout_hit ? ", engine timeout hit" : ""));
  });

  if (std::none_of(res.models.begin(), res.models.end(), [](const ModelTests& m) { return m.report.compiled; })) {
    throw Error("no model compiled; see models/*/report.json");
  }
  std::vector<TestCase> all;
  for (const auto& m : res.models) all.insert(all.end(), m.tests.begin(), m.tests.end());
  auto unique = dedup_union(all);
  res.suite = TestSuite{manifest.name, plan.fingerprint(), export_suite(unique, cfg.keep_invalid)};
  write_json(run_dir / "tests.json", res.suite.to_json());
  log << "gen-tests: " << all.size() << " reconstructed, " << unique.size() << " unique, " << res.suite.tests.size()
      << " exported to tests.json\n";
  return res;
}

StateGraph ensure_state_graph(const fs::path& run_dir, const Manifest& manifest, std::ostream& log) {
  auto path = run_dir / "stategraph.json";
  if (fs::exists(path)) return StateGraph::from_json(read_json(path));
  auto dirs = model_dirs(run_dir);
  if (dirs.empty()) throw Error("no models to extract a state graph from");
  auto plan = manifest.plan();
  std::vector<std::string> order;
  if (auto s = state_arg(plan, manifest.protocol)) {
    if (const auto* e = s->type.resolved().as<Type::Enumeration>()) order = e->variants;
  }
  auto backend = make_backend(manifest.backend);
  log << "stategraph: extracting from " << dirs.front().filename().string() << "\n";
  try {
    auto g = extract_state_graph(util::read_file(dirs.front() / "model.c"), *backend, manifest.generation, order);
    for (const auto& w : g.validate()) log << "stategraph: warning: " << w << "\n";
    write_json(path, g.to_json());
    return g;
  } catch (const StateGraphError& e) {
    util::write_file(run_dir / "stategraph_reply.txt", e.raw());
    throw;
  }
}

TriageReport run_difftest(const fs::path& run_dir, const DifftestOptions& options, std::ostream& log) {
  const Manifest manifest = load_workspace_manifest(run_dir);
  if (!fs::exists(run_dir / "tests.json")) throw Error("no tests.json in " + run_dir.string() + "; run gen-tests first");
  auto suite = TestSuite::from_json(read_json(run_dir / "tests.json"));

  Json cfg = read_json(options.adapters);
  const fs::path base = fs::absolute(options.adapters).parent_path();
  std::vector<std::unique_ptr<Adapter>> adapters;
  std::vector<std::string> v;
  for (const auto& a : cfg.value("adapters", Json::array())) {
    try {
      adapters.push_back(make_adapter(a, base));
    } catch (const ValidationError& e) {
      v.insert(v.end(), e.violations().begin(), e.violations().end());
    }
  }
  if (v.empty() && adapters.size() < 2) v.push_back("differential testing needs at least two adapters");
  if (!v.empty()) throw ValidationError(v);
  auto ignore = cfg.value("ignore_fields", std::vector<std::string>{});
  std::size_t cap = options.witness_cap.value_or(cfg.value("witness_cap", std::size_t{10}));

  std::optional<StateGraph> graph;
  if (manifest.protocol.kind == "smtp") graph = ensure_state_graph(run_dir, manifest, log);
  auto tr = translate_suite(suite.tests, manifest.protocol, graph);
  for (const auto& s : tr.skipped) log << "difftest: skipped " << s << "\n";
  if (tr.stimuli.empty()) log << "difftest: warning: no tests to run\n";

  auto results = run_suite(adapters, tr.stimuli);
  std::vector<TestTriage> triages;
  Json responses = Json::array();
  for (const auto& t : results) {
    std::vector<std::pair<std::string, Response>> norm;
    Json row{{"test_id", t.test_id}, {"responses", Json::object()}};
    for (const auto& [id, r] : t.responses) {
      norm.emplace_back(id, normalize_response(r, manifest.protocol, ignore));
      row["responses"][id] = r.to_json();
    }
    responses.push_back(row);
    triages.push_back(majority_and_triage(norm, t.test_id));
  }
  auto report = aggregate_report(triages, cap);
  report.skipped = tr.skipped.size();
  for (const auto& s : tr.skipped) report.notes.push_back("skipped " + s);
  write_json(run_dir / "responses.json", responses);
  write_json(run_dir / "triage.json", report.to_json());
  util::write_file(run_dir / "triage.md", report.to_markdown());
  log << "difftest: " << results.size() << " test(s), " << report.groups.size() << " unique disagreement(s), "
      << report.no_majority_tests.size() << " without a majority\n";
  return report;
}

std::vector<std::size_t> prefix_unique_counts(const std::vector<ModelTests>& models, int n) {
  std::vector<std::size_t> out;
  for (int k = 1; k <= n; ++k) {
    std::vector<TestCase> all;
    for (const auto& m : models) {
      if (sample_index_of(m.model_id) >= k) continue;
      for (const auto& t : m.tests) {
        if (!t.invalid) all.push_back(t);
      }
    }
    out.push_back(dedup_union(all).size());
  }
  return out;
}

std::vector<SweepRow> run_sweep(const Manifest& manifest, const SweepOptions& options, std::ostream& log) {
  std::vector<std::string> v;
  if (options.k_max < 1) v.push_back("k-max must be >= 1");
  if (options.runs < 1) v.push_back("runs must be >= 1");
  if (options.temperatures.empty()) v.push_back("at least one temperature is required");
  if (!v.empty()) throw ValidationError(v);
  std::vector<SweepRow> rows;
  for (double t : options.temperatures) {
    std::vector<double> sums(static_cast<std::size_t>(options.k_max), 0.0);
    for (int r = 0; r < options.runs; ++r) {
      char tag[48];
      std::snprintf(tag, sizeof tag, "t%.2f-r%d", t, r);
      SynthOptions so;
      so.k = options.k_max;
      so.temperature = t;
      so.out = options.out / tag;
      auto synth = run_synth(manifest, so, log);
      auto gen = run_gen_tests(synth.run_dir, options.gen, log);
      auto counts = prefix_unique_counts(gen.models, options.k_max);
      for (std::size_t k = 0; k < counts.size(); ++k) sums[k] += static_cast<double>(counts[k]);
    }
    for (int k = 1; k <= options.k_max; ++k) {
      rows.push_back(SweepRow{t, k, sums[static_cast<std::size_t>(k - 1)] / options.runs, options.runs});
    }
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = "temperature,k,mean_unique,runs\n";
  char line[96];
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%.2f,%d,%.3f,%d\n", r.temperature, r.k, r.mean_unique, r.runs);
    out += line;
  }
  return out;
}

}  // namespace protosynth
