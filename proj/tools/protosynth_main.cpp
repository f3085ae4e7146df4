#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

#include "protosynth/pipeline.hpp"
#include "protosynth/prompt_forge.hpp"
#include "protosynth/util.hpp"

namespace ps = protosynth;
namespace fs = std::filesystem;

namespace {

enum Exit { kOk = 0, kFindings = 1, kUsage = 2, kEnvironment = 3 };

std::vector<double> parse_temperatures(const std::string& text) {
  std::vector<double> out;
  std::string item;
  for (char c : text + ",") {
    if (c != ',') {
      item += c;
      continue;
    }
    if (ps::util::trim(item).empty()) continue;
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ps::ValidationError({"bad temperature '" + item + "'"});
    }
    item.clear();
  }
  return out;
}

std::optional<std::chrono::seconds> seconds_of(const std::string& text) {
  if (text.empty()) return std::nullopt;
  return std::chrono::duration_cast<std::chrono::seconds>(ps::util::parse_duration(text));
}

std::optional<std::string> engine_runtime(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("PROTOSYNTH_ENGINE_RUNTIME"); env != nullptr && *env != '\0') return std::string(env);
  return std::nullopt;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Model-based protocol test generation: synthesize models with an LLM, derive tests by symbolic "
               "execution, and compare implementations."};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "Render prompts, sample completions and assemble k models");
  std::string synth_manifest, backend_kind, fixtures, endpoint, model, api_key_env, out = "workspace";
  std::optional<int> k;
  std::optional<double> temperature;
  synth->add_option("manifest", synth_manifest, "Model manifest (JSON)")->required()->check(CLI::ExistingFile);
  synth->add_option("--k", k, "Models to synthesize");
  synth->add_option("--temperature", temperature, "Sampling temperature");
  synth->add_option("--backend", backend_kind, "Override the manifest backend: stub or remote")
      ->check(CLI::IsMember({"stub", "remote"}));
  synth->add_option("--fixtures", fixtures, "Stub completion directory");
  synth->add_option("--endpoint", endpoint, "Remote chat-completions base URL");
  synth->add_option("--model", model, "Remote model name");
  synth->add_option("--api-key-env", api_key_env, "Environment variable holding the API key");
  synth->add_option("--out", out, "Workspace directory")->capture_default_str();

  // gen-tests
  auto* gen = app.add_subcommand("gen-tests", "Compile models, run the symbolic engine and export tests.json");
  std::string gen_ws = "workspace", gen_timeout, gen_engine;
  bool keep_invalid = false;
  unsigned jobs = 0;
  gen->add_option("--workspace", gen_ws, "Workspace or run directory")->capture_default_str();
  gen->add_option("--timeout", gen_timeout, "Engine time budget per model, e.g. 300s");
  gen->add_option("--engine", gen_engine,
                  "Engine runtime: docker, podman, local or fixture:<dir> (env PROTOSYNTH_ENGINE_RUNTIME)");
  gen->add_flag("--keep-invalid", keep_invalid, "Keep tests whose validity flag is set");
  gen->add_option("--jobs", jobs, "Models processed concurrently (0: all cores)");

  // difftest
  auto* diff = app.add_subcommand("difftest", "Run tests against implementations and triage disagreements");
  std::string diff_ws = "workspace", adapters;
  std::optional<std::size_t> witness_cap;
  diff->add_option("--workspace", diff_ws, "Workspace or run directory")->capture_default_str();
  diff->add_option("--adapters", adapters, "Adapter configuration (JSON)")->required()->check(CLI::ExistingFile);
  diff->add_option("--witness-cap", witness_cap, "Witness tests listed per disagreement");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Unique tests versus k and temperature, as CSV");
  std::string sweep_manifest, temperatures = "0.2,0.4,0.6,0.8,1.0", sweep_out = "sweep", sweep_engine, sweep_timeout;
  int k_max = 12, runs = 1;
  sweep->add_option("manifest", sweep_manifest, "Model manifest (JSON)")->required()->check(CLI::ExistingFile);
  sweep->add_option("--k-max", k_max, "Largest k")->capture_default_str();
  sweep->add_option("--temperatures", temperatures, "Comma-separated temperatures")->capture_default_str();
  sweep->add_option("--runs", runs, "Repetitions per temperature")->capture_default_str();
  sweep->add_option("--out", sweep_out, "Output directory")->capture_default_str();
  sweep->add_option("--engine", sweep_engine, "Engine runtime override");
  sweep->add_option("--timeout", sweep_timeout, "Engine time budget per model");

  // prompts
  auto* prompts = app.add_subcommand("prompts", "Print rendered prompts or stub fixture names");
  std::string prompts_manifest, module;
  bool keys = false;
  prompts->add_option("manifest", prompts_manifest, "Model manifest (JSON)")->required()->check(CLI::ExistingFile);
  prompts->add_option("--module", module, "Only this module");
  prompts->add_flag("--keys", keys, "Print '<module> <stub key>' lines instead of prompt text");

  // stategraph
  auto* sg = app.add_subcommand("stategraph", "Extract (or show) the state graph of a workspace");
  std::string sg_ws = "workspace";
  sg->add_option("--workspace", sg_ws, "Workspace or run directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*synth) {
      auto m = ps::load_manifest(synth_manifest);
      ps::SynthOptions o;
      o.k = k;
      o.temperature = temperature;
      o.out = out;
      if (!backend_kind.empty() || !fixtures.empty() || !endpoint.empty()) {
        ps::BackendConfig b = m.backend;
        if (!backend_kind.empty()) b.kind = backend_kind == "stub" ? ps::BackendConfig::Kind::stub : ps::BackendConfig::Kind::remote;
        if (!fixtures.empty()) b.fixtures = fixtures;
        if (!endpoint.empty()) b.endpoint = endpoint;
        if (!model.empty()) b.model = model;
        if (!api_key_env.empty()) b.api_key_env = api_key_env;
        if (b.kind == ps::BackendConfig::Kind::remote && (b.endpoint.empty() || b.model.empty())) {
          throw ps::ValidationError({"--backend remote needs --endpoint and --model"});
        }
        o.backend = b;
      }
      auto r = ps::run_synth(m, o, std::cerr);
      std::cout << r.run_dir.string() << "\n";
    } else if (*gen) {
      ps::GenTestsOptions o;
      o.timeout = seconds_of(gen_timeout);
      o.runtime = engine_runtime(gen_engine);
      if (keep_invalid) o.keep_invalid = true;
      o.jobs = jobs;
      auto r = ps::run_gen_tests(ps::resolve_workspace(gen_ws), o, std::cerr);
      std::cout << r.suite.tests.size() << " test(s)\n";
    } else if (*diff) {
      ps::DifftestOptions o{adapters, witness_cap};
      auto report = ps::run_difftest(ps::resolve_workspace(diff_ws), o, std::cerr);
      std::cout << report.to_markdown();
      return report.has_findings() ? kFindings : kOk;
    } else if (*sweep) {
      auto m = ps::load_manifest(sweep_manifest);
      ps::SweepOptions o;
      o.k_max = k_max;
      o.runs = runs;
      o.temperatures = parse_temperatures(temperatures);
      o.out = sweep_out;
      o.gen.runtime = engine_runtime(sweep_engine);
      o.gen.timeout = seconds_of(sweep_timeout);
      auto csv = ps::sweep_csv(ps::run_sweep(m, o, std::cerr));
      ps::util::write_file(fs::path(sweep_out) / "sweep.csv", csv);
      std::cout << csv;
    } else if (*prompts) {
      auto m = ps::load_manifest(prompts_manifest);
      auto plan = m.plan();
      for (const auto& mod : plan.function_modules()) {
        if (!module.empty() && mod != module) continue;
        auto p = ps::make_prompt(plan, mod);
        if (keys) {
          std::cout << mod << " " << ps::stub_fixture_key(p) << "\n";
        } else {
          std::cout << "=== " << mod << " ===\n" << p.user << "\n";
        }
      }
    } else if (*sg) {
      auto run = ps::resolve_workspace(sg_ws);
      auto g = ps::ensure_state_graph(run, ps::load_workspace_manifest(run), std::cerr);
      std::cout << ps::render_transition_dict(g);
    }
    return kOk;
  } catch (const ps::ValidationError& e) {
    std::cerr << "error: invalid configuration\n";
    for (const auto& v : e.violations()) std::cerr << "  - " << v << "\n";
    return kUsage;
  } catch (const ps::EnvironmentError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kEnvironment;
  } catch (const ps::GatewayError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kEnvironment;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
}
