#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "protosynth/engine.hpp"
#include "protosynth/manifest.hpp"
#include "protosynth/state_driver.hpp"
#include "protosynth/test_case.hpp"
#include "protosynth/triage.hpp"

namespace protosynth {

// Workspace layout (one run):
//   manifest.json plan.json synth.json prompts/ models/<id>/{model.c, symbols.json,
//   provenance.json, ktests/, report.json} tests.json stategraph.json triage.json
//   triage.md responses.json
// Runs live in <out>/runs/<timestamp>[-n]/ and <out>/LATEST names the newest.

// Creates a fresh run directory and points LATEST at it.
std::filesystem::path create_run_dir(const std::filesystem::path& out);
// A run directory as is, or the LATEST run under an output directory.
std::filesystem::path resolve_workspace(const std::filesystem::path& path);
Manifest load_workspace_manifest(const std::filesystem::path& run_dir);

struct SynthOptions {
  std::optional<int> k;
  std::optional<double> temperature;
  std::optional<BackendConfig> backend;
  std::filesystem::path out = "workspace";
  // Write into this directory instead of creating a new run.
  std::optional<std::filesystem::path> run_dir;
};

struct SynthResult {
  std::filesystem::path run_dir;
  std::vector<std::string> model_ids;
  std::vector<SkippedSample> skipped;
};

// Throws Error when every sample fails.
SynthResult run_synth(const Manifest& manifest, const SynthOptions& options, std::ostream& log);

struct GenTestsOptions {
  std::optional<std::chrono::seconds> timeout;
  std::optional<std::string> runtime;
  std::optional<bool> keep_invalid;
  unsigned jobs = 0;  // 0: hardware concurrency
};

struct ModelTests {
  std::string model_id;
  EngineRunReport report;
  std::vector<TestCase> tests;  // reconstructed, before dedup
};

struct GenTestsResult {
  std::vector<ModelTests> models;
  TestSuite suite;
};

// Throws Error when no model compiles, EnvironmentError when the toolchain
// or engine is unavailable.
GenTestsResult run_gen_tests(const std::filesystem::path& run_dir, const GenTestsOptions& options, std::ostream& log);

struct DifftestOptions {
  std::filesystem::path adapters;  // adapter configuration file
  std::optional<std::size_t> witness_cap;
};

// Loads or extracts the state graph for SMTP-style models (stategraph.json).
StateGraph ensure_state_graph(const std::filesystem::path& run_dir, const Manifest& manifest, std::ostream& log);

TriageReport run_difftest(const std::filesystem::path& run_dir, const DifftestOptions& options, std::ostream& log);

struct SweepOptions {
  int k_max = 12;
  std::vector<double> temperatures = {0.2, 0.4, 0.6, 0.8, 1.0};
  int runs = 1;
  std::filesystem::path out = "sweep";
  GenTestsOptions gen;
};

struct SweepRow {
  double temperature = 0;
  int k = 0;
  double mean_unique = 0;
  int runs = 0;
};

// Unique-test counts over model prefixes 1..k_max, averaged over runs.
std::vector<SweepRow> run_sweep(const Manifest& manifest, const SweepOptions& options, std::ostream& log);
std::string sweep_csv(const std::vector<SweepRow>& rows);

// Unique test count of the union over the first k models, for k = 1..n.
std::vector<std::size_t> prefix_unique_counts(const std::vector<ModelTests>& models, int n);

}  // namespace protosynth
