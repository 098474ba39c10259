// Copyright 2026 The spatrwd Authors.
// SPDX-License-Identifier: Apache-2.0
//
// spatrwd: score images against prompts, run benchmarks, and serve rewards.

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <pthread.h>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "spatrwd/backend.hpp"
#include "spatrwd/bench.hpp"
#include "spatrwd/config.hpp"
#include "spatrwd/decompose.hpp"
#include "spatrwd/error.hpp"
#include "spatrwd/fixture.hpp"
#include "spatrwd/relations.hpp"
#include "spatrwd/scene_oracle.hpp"
#include "spatrwd/service.hpp"

namespace {

using namespace spatrwd;

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitError = 2;

std::string ReadFile(const std::string& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(ErrorKind::kInvalidArgument, "cannot open " + file);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void Emit(const std::string& text, const std::string& out_file) {
  if (out_file.empty()) {
    std::cout << text << std::flush;
    return;
  }
  std::ofstream out(out_file, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kInvalidArgument, "cannot write " + out_file);
  out << text;
}

Json ParseJsonFile(const std::string& file) {
  const std::string text = ReadFile(file);
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorKind::kSchemaViolation, file + ": invalid JSON: " + e.what());
  }
}

// Blocks SIGINT/SIGTERM in every thread and stops `stop` when one arrives.
template <typename Stop>
std::thread StopOnSignal(Stop stop) {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
  return std::thread([set, stop]() mutable {
    int sig = 0;
    sigwait(&set, &sig);
    stop();
  });
}

struct Common {
  std::string config_file;
  SettingOverrides overrides;
  std::string relations;
};

void AddEngineFlags(CLI::App* cmd, Common& common) {
  cmd->add_option("--tau-det", common.overrides.tau_det, "Detection confidence threshold");
  cmd->add_option("--tau-pass", common.overrides.tau_pass, "Pass threshold on the normalized total");
  cmd->add_option("--relations", common.relations, "Relation path: geo or cot")->check(CLI::IsMember({"geo", "cot"}));
  cmd->add_option("--backend", common.overrides.backend, "fixture:SCENE, cmd:EXEC or http:URL");
}

Settings Resolve(Common& common) {
  if (!common.relations.empty()) common.overrides.relations = ParseRelationPath(common.relations);
  return ResolveSettings(common.config_file, common.overrides);
}

std::vector<TagWeight> ParseMix(const std::string& text) {
  if (text.empty()) return DefaultTagMix();
  std::vector<TagWeight> mix;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto eq = item.find('=');
    const std::string name = item.substr(0, eq);
    auto tag = ParseTag(name);
    if (!tag) throw Error(ErrorKind::kInvalidArgument, "unknown tag \"" + name + "\" in --mix");
    double weight = 1.0;
    if (eq != std::string::npos) {
      try {
        weight = std::stod(item.substr(eq + 1));
      } catch (const std::exception&) {
        throw Error(ErrorKind::kInvalidArgument, "bad weight in --mix item \"" + item + "\"");
      }
    }
    mix.push_back({*tag, weight});
  }
  return mix;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Verifiable spatial-reward scoring for text-to-image evaluation"};
  app.require_subcommand(1);
  Common common;
  app.add_option("--config", common.config_file, "JSON config file (flags > SPATRWD_* env > file)");

  // score
  auto* score = app.add_subcommand("score", "Score one image against a prompt or constraint set");
  std::string prompt, constraints_file, image_file, scene_file, out_file, format = "json";
  auto* prompt_opt = score->add_option("--prompt", prompt, "Prompt text");
  auto* constraints_opt = score->add_option("--constraints", constraints_file, "ConstraintSet JSON file");
  prompt_opt->excludes(constraints_opt);
  score->add_option("--image", image_file, "Image file passed to the backend");
  score->add_option("--scene", scene_file, "SceneGraph file; implies a fixture backend unless --backend is given");
  score->add_option("--out", out_file, "Write the report here instead of stdout");
  score->add_option("--format", format, "json or md")->check(CLI::IsMember({"json", "md", "markdown"}));
  AddEngineFlags(score, common);

  // bench
  auto* bench = app.add_subcommand("bench", "Run a benchmark manifest");
  std::string manifest_file, resume_file, md_out;
  bench->add_option("--manifest", manifest_file, "Manifest JSONL")->required();
  bench->add_option("--jobs", common.overrides.jobs, "Items evaluated in parallel");
  bench->add_option("--resume", resume_file, "Progress JSONL; completed items are not rerun");
  bench->add_option("--out", out_file, "Write the report here instead of stdout");
  bench->add_option("--format", format, "json or md")->check(CLI::IsMember({"json", "md", "markdown"}));
  bench->add_option("--md-out", md_out, "Also write the Markdown table here");
  bool skip_errors = false, per_constraint = false;
  bench->add_flag("--skip-errors", skip_errors, "Leave errored items out of the denominators");
  bench->add_flag("--per-constraint", per_constraint, "One judgment per constraint instead of per item");
  AddEngineFlags(bench, common);

  // decompose
  auto* decompose = app.add_subcommand("decompose", "Print the ConstraintSet for a prompt");
  decompose->add_option("--prompt,prompt", prompt, "Prompt text")->required();
  decompose->add_option("--backend", common.overrides.backend, "Backend used when no template matches");

  // serve
  auto* serve = app.add_subcommand("serve", "HTTP scoring service");
  std::string host = "127.0.0.1";
  int port = 8080;
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--port", port, "Port; 0 picks a free one");
  serve->add_option("--max-concurrent", common.overrides.max_concurrent_requests, "Worker threads");
  AddEngineFlags(serve, common);

  // fixture-serve
  auto* fixture = app.add_subcommand("fixture-serve", "Serve a SceneGraph over the detector protocol");
  std::string concurrency = "parallel";
  int fixture_port = -1;
  bool no_geometric_cot = false;
  fixture->add_option("--scene", scene_file, "SceneGraph file")->required();
  fixture->add_option("--concurrency", concurrency, "single or parallel")->check(CLI::IsMember({"single", "parallel"}));
  fixture->add_option("--port", fixture_port, "Serve HTTP on this port instead of NDJSON on stdio");
  fixture->add_option("--host", host, "Bind address for --port");
  fixture->add_flag("--no-geometric-cot", no_geometric_cot, "Answer unplanted cot requests with NotImplemented");

  // suite
  auto* suite = app.add_subcommand("suite", "Generate a planted benchmark suite");
  int n = 100;
  std::uint64_t seed = 0;
  std::string mix_text, specs_out;
  suite->add_option("--n", n, "Number of items");
  suite->add_option("--seed", seed, "Seed");
  suite->add_option("--mix", mix_text, "tag[=weight],... (default: all ten tags equally)");
  suite->add_option("--manifest", manifest_file, "Write a bench manifest with inline scenes");
  suite->add_option("--specs", specs_out, "Write PlantSpec JSONL");
  suite->add_option("--tau-pass", common.overrides.tau_pass, "Pass threshold for expected verdicts");

  // plant
  auto* plant = app.add_subcommand("plant", "Plant a scene for a PlantSpec");
  std::string spec_file;
  plant->add_option("--spec", spec_file, "PlantSpec JSON file")->required();
  plant->add_option("--out", out_file, "Write the scene here; the expected scores go to stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitError;
  }

  try {
    if (*score) {
      if (image_file.empty() && scene_file.empty()) {
        std::cerr << "error: one of --image or --scene is required\n" << score->help();
        return kExitError;
      }
      if (prompt.empty() && constraints_file.empty()) {
        std::cerr << "error: one of --prompt or --constraints is required\n" << score->help();
        return kExitError;
      }
      const bool backend_flag = common.overrides.backend.has_value();
      const Settings settings = Resolve(common);
      std::shared_ptr<PerceptionBackend> backend;
      if (backend_flag || scene_file.empty()) {
        if (settings.backend.empty()) throw Error(ErrorKind::kInvalidArgument, "no backend given (--backend)");
        backend = MakeBackend(settings.backend, settings.engine.relation);
      } else {
        backend = FixtureBackend(LoadSceneGraph(scene_file), settings.engine.relation);
      }
      ScoreRequest request;
      if (!constraints_file.empty()) {
        request.constraints = ParseConstraintSet(ParseJsonFile(constraints_file), constraints_file);
      } else {
        request.prompt = prompt;
      }
      if (!image_file.empty()) request.image = ImageRef::Path(image_file);
      request.format = *ParseReportFormat(format);
      bool verdict = false;
      Emit(ScoreAndRender(request, settings.engine, *backend, &verdict), out_file);
      return verdict ? kExitPass : kExitFail;
    }

    if (*bench) {
      if (skip_errors) common.overrides.skip_errors = true;
      if (per_constraint) common.overrides.per_constraint = true;
      const Settings settings = Resolve(common);
      const auto manifest = LoadManifest(manifest_file);
      std::shared_ptr<PerceptionBackend> shared;
      if (!settings.backend.empty()) shared = MakeBackend(settings.backend, settings.engine.relation);
      BenchOptions options;
      options.engine = settings.engine;
      options.jobs = settings.jobs;
      options.skip_errors = settings.skip_errors;
      options.per_constraint = settings.per_constraint;
      options.resume_file = resume_file;
      const BenchReport report = RunBench(
          manifest, [shared](const BenchItem&) { return shared; }, options);
      if (report.resumed > 0) std::cerr << "spatrwd bench: resumed " << report.resumed << " items\n";
      const bool md = *ParseReportFormat(format) == ReportFormat::kMarkdown;
      Emit(md ? RenderBenchMarkdown(report) : RenderBenchJson(report), out_file);
      if (!md_out.empty()) Emit(RenderBenchMarkdown(report), md_out);
      return kExitPass;
    }

    if (*decompose) {
      std::string decomposer;
      ConstraintSet set;
      if (common.overrides.backend) {
        const Settings settings = Resolve(common);
        auto backend = MakeBackend(settings.backend, settings.engine.relation);
        set = ResolveConstraints(prompt, *backend, &decomposer);
      } else {
        set = DecomposeTemplate(prompt);
      }
      std::cout << Serialize(set) << "\n";
      return kExitPass;
    }

    if (*serve) {
      const Settings settings = Resolve(common);
      std::shared_ptr<PerceptionBackend> backend;
      if (!settings.backend.empty()) backend = MakeBackend(settings.backend, settings.engine.relation);
      ScoringService service(settings, backend);
      const int bound = service.Bind(host, port);
      if (bound < 0) throw Error(ErrorKind::kInvalidArgument, "cannot bind " + host + ":" + std::to_string(port));
      std::thread stopper = StopOnSignal([&service] { service.Stop(); });
      std::cerr << "spatrwd serve: listening on " << host << ":" << bound << std::endl;
      service.Serve();
      stopper.detach();
      return kExitPass;
    }

    if (*fixture) {
      const Settings settings = Resolve(common);
      SceneGraph scene = LoadSceneGraph(scene_file);
      CotResponder fallback;
      if (!no_geometric_cot) fallback = GeometricCotResponder(scene, settings.engine.relation);
      auto server = std::make_shared<FixtureServer>(
          std::move(scene), fallback, concurrency == "single" ? Concurrency::kSingle : Concurrency::kParallel);
      if (fixture_port < 0) {
        ServeNdjson(*server, std::cin, std::cout);
        return kExitPass;
      }
      FixtureHttpServer http(server);
      const int bound = http.Bind(host, fixture_port);
      if (bound < 0) throw Error(ErrorKind::kInvalidArgument, "cannot bind port " + std::to_string(fixture_port));
      std::thread stopper = StopOnSignal([&http] { http.Stop(); });
      std::cerr << "spatrwd fixture-serve: listening on " << host << ":" << bound << std::endl;
      http.Serve();
      stopper.detach();
      return kExitPass;
    }

    if (*suite) {
      if (manifest_file.empty() && specs_out.empty()) {
        throw Error(ErrorKind::kInvalidArgument, "suite needs --manifest and/or --specs");
      }
      const Settings settings = Resolve(common);
      const auto specs = RandomSuite(n, seed, ParseMix(mix_text), settings.engine);
      std::string manifest_text, specs_text;
      const int width = std::max<int>(4, static_cast<int>(std::to_string(specs.size()).size()));
      for (std::size_t i = 0; i < specs.size(); ++i) {
        specs_text += Serialize(specs[i]) + "\n";
        const PlantResult planted = PlantScene(specs[i], settings.engine);
        std::string id = std::to_string(i + 1);
        BenchItem item;
        item.item_id = "item-" + std::string(static_cast<std::size_t>(width) - id.size(), '0') + id;
        item.dimension = specs[i].constraint_set.tag;
        item.constraints = specs[i].constraint_set;
        item.scene = planted.scene;
        item.expected = planted.verdict;
        manifest_text += ToJson(item).dump() + "\n";
      }
      if (!manifest_file.empty()) Emit(manifest_text, manifest_file);
      if (!specs_out.empty()) Emit(specs_text, specs_out);
      return kExitPass;
    }

    if (*plant) {
      const Settings settings = Resolve(common);
      const PlantSpec spec = ParsePlantSpec(ParseJsonFile(spec_file), spec_file);
      const PlantResult planted = PlantScene(spec, settings.engine);
      Json expected;
      expected["schema_version"] = 1;
      expected["per_constraint"] = Json::array();
      for (const auto& e : planted.expected) {
        expected["per_constraint"].push_back(Json{{"entity_id", e.entity_id},
                                                  {"role", e.role == Role::kInclusion ? "inclusion" : "exclusion"},
                                                  {"composed", e.composed},
                                                  {"pass", e.pass}});
      }
      expected["raw_total"] = planted.raw_total;
      expected["normalized_total"] = planted.normalized_total;
      expected["verdict"] = planted.verdict;
      if (out_file.empty()) {
        expected["scene"] = ToJson(planted.scene);
      } else {
        Emit(Serialize(planted.scene) + "\n", out_file);
      }
      std::cout << WriteJson(expected) << "\n";
      return kExitPass;
    }
  } catch (const Error& e) {
    std::cerr << "spatrwd: " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "spatrwd: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
